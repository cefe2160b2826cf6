"""Periodic grids, Fourier transforms, sharp frequency projections, dealiasing.

Conventions
-----------
The spatial domain is the periodic box ``[-l, l)^d`` sampled at ``n`` points
per axis, spacing ``h = 2l/n``.  Transforms use the unitary-in-mass "2PI"
convention: frequencies live at ``xi_k = k/(2l)`` for ``k in [-n/2, n/2)``
and coefficients satisfy

    f(x_j) = sum_k  coeff(xi_k) * exp(+2*pi*i * x_j . xi_k) * dxi^d,
    coeff(xi_k) = sum_j f(x_j) * exp(-2*pi*i * x_j . xi_k) * h^d,

so that ``coeff`` approximates the continuum transform
``int f(x) exp(-2*pi*i x.xi) dx`` and Plancherel reads
``sum |coeff|^2 dxi^d = sum |f|^2 h^d``.  Under this convention the free
Schrodinger multiplier is ``exp(-4*pi^2*i*t*|xi|^2)`` (see propagator).

Because ``x_j = -l + j*h`` rather than ``j*h``, the DFT acquires a per-axis
``(-1)^k`` phase relative to ``numpy.fft``; it is applied explicitly so the
stored coefficients are the true continuum-convention values.

Coefficients are stored in numpy fft order (mode 0 first); serialization in
``formats`` writes them in ascending-frequency order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonFiniteInput

#: relative slack applied to sharp cutoffs so that lattice frequencies that
#: land exactly on a region boundary are kept regardless of float rounding
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-half_width, half_width)^d``.

    ``n`` must be a power of two (>= 8) so that transforms, dealias masks
    and dyadic rescalings stay exact.
    """

    d: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def dxi(self) -> float:
        return 1.0 / (2.0 * self.half_width)

    @property
    def nyquist(self) -> float:
        """Largest representable |frequency| per axis, (n/2)*dxi."""
        return (self.n // 2) * self.dxi

    def axis(self) -> np.ndarray:
        """Spatial coordinates along one axis."""
        return -self.half_width + self.h * np.arange(self.n)

    def xi_axis(self) -> np.ndarray:
        """Frequencies along one axis, fft order (k/(2l))."""
        return np.fft.fftfreq(self.n, d=self.h)

    def x_mesh(self) -> tuple:
        """Tuple of d broadcastable coordinate arrays."""
        ax = self.axis()
        if self.d == 1:
            return (ax,)
        return (ax[:, None], ax[None, :])

    def xi_mesh(self) -> tuple:
        xi = self.xi_axis()
        if self.d == 1:
            return (xi,)
        return (xi[:, None], xi[None, :])


@lru_cache(maxsize=64)
def _xi_sq(grid: Grid) -> np.ndarray:
    """|xi|^2 on the frequency mesh (fft order)."""
    xi = grid.xi_axis()
    if grid.d == 1:
        out = xi ** 2
    else:
        out = xi[:, None] ** 2 + xi[None, :] ** 2
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _alt_phase(grid: Grid) -> np.ndarray:
    """Per-axis (-1)^k factor relating numpy's DFT to the box convention."""
    k = np.rint(grid.xi_axis() * 2.0 * grid.half_width).astype(np.int64)
    p = np.where(k % 2 == 0, 1.0, -1.0)
    if grid.d == 2:
        p = p[:, None] * p[None, :]
    p.setflags(write=False)
    return p


@lru_cache(maxsize=64)
def _abs_k(grid: Grid) -> np.ndarray:
    """max_i |k_i| integer mode magnitude on the mesh (fft order)."""
    k = np.abs(np.rint(grid.xi_axis() * 2.0 * grid.half_width)).astype(np.int64)
    if grid.d == 1:
        out = k
    else:
        out = np.maximum(k[:, None], k[None, :])
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Field:
    """Complex state sampled on a grid, C-order values of shape grid.shape."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a Field, numpy fft mode order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ValueError(f"coeffs shape {c.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class FreqRegion:
    """Axis-aligned frequency cube or origin-free ball (sharp indicator)."""

    kind: str
    center: tuple
    extent: float

    def __post_init__(self):
        if self.kind not in ("cube", "ball"):
            raise ValueError(f"kind must be 'cube' or 'ball', got {self.kind!r}")
        if not (self.extent > 0):
            raise ValueError(f"extent must be positive, got {self.extent}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def cube(cls, center, side: float) -> "FreqRegion":
        center = (center,) if np.isscalar(center) else tuple(center)
        return cls("cube", center, float(side))

    @classmethod
    def ball(cls, radius: float, center=None, d: int = None) -> "FreqRegion":
        if center is None:
            center = (0.0,) * (d if d is not None else 1)
        center = (center,) if np.isscalar(center) else tuple(center)
        return cls("ball", center, float(radius))


def forward_transform(f: Field) -> Spectrum:
    """Field -> Spectrum under the box convention (see module docstring)."""
    if not np.all(np.isfinite(f.values.view(np.float64))):
        raise NonFiniteInput("field contains non-finite values")
    g = f.grid
    coeffs = (g.h ** g.d) * _alt_phase(g) * np.fft.fftn(f.values)
    return Spectrum(g, coeffs)


def inverse_transform(s: Spectrum) -> Field:
    """Exact inverse of forward_transform up to roundoff."""
    if not np.all(np.isfinite(s.coeffs.view(np.float64))):
        raise NonFiniteInput("spectrum contains non-finite values")
    g = s.grid
    values = np.fft.ifftn(s.coeffs * _alt_phase(g)) / (g.h ** g.d)
    return Field(g, values)


def region_mask(grid: Grid, region: FreqRegion) -> np.ndarray:
    """Boolean indicator of the region on the frequency mesh.

    Boundary frequencies are included: ``|xi - xi0|_inf <= side/2`` for
    cubes, ``|xi| <= radius`` for balls (with an epsilon guard so exact
    lattice boundaries survive rounding).
    """
    if len(region.center) != grid.d:
        raise ValueError(f"region center has dim {len(region.center)}, grid is {grid.d}-d")
    mesh = grid.xi_mesh()
    tol = _EDGE_TOL * max(1.0, abs(region.extent))
    if region.kind == "cube":
        half = region.extent / 2.0 + tol
        mask = np.ones(grid.shape, dtype=bool)
        for ax in range(grid.d):
            mask &= np.abs(mesh[ax] - region.center[ax]) <= half
        return mask
    r2 = np.zeros(grid.shape)
    for ax in range(grid.d):
        r2 = r2 + (mesh[ax] - region.center[ax]) ** 2
    return r2 <= (region.extent + tol) ** 2


def project(s: Spectrum, r: FreqRegion) -> Spectrum:
    """Zero all coefficients outside the region (sharp cutoff)."""
    mask = region_mask(s.grid, r)
    return Spectrum(s.grid, np.where(mask, s.coeffs, 0.0))


def project_field(f: Field, r: FreqRegion) -> Field:
    """Convenience: transform, project, transform back."""
    return inverse_transform(project(forward_transform(f), r))


def dealias(s: Spectrum, p: int) -> Spectrum:
    """Zero modes that a degree-p product would alias back into band.

    Retains ``max_i |k_i| <= n*rho/2`` with ``rho = 2/(p+1)`` (the 1/2 rule
    for cubic, 1/3 rule for quintic nonlinearities).
    """
    if p not in (3, 5):
        raise ValueError(f"nonlinearity order must be 3 or 5, got {p}")
    g = s.grid
    keep = _abs_k(g) <= dealias_mode_cutoff(g.n, p)
    return Spectrum(g, np.where(keep, s.coeffs, 0.0))


def dealias_mode_cutoff(n: int, p: int) -> int:
    """Largest retained integer mode for a degree-p nonlinearity."""
    return int(np.floor(n / (p + 1) + 1e-9))


@lru_cache(maxsize=64)
def _dealias_mask(grid: Grid, p: int) -> np.ndarray:
    mask = _abs_k(grid) <= dealias_mode_cutoff(grid.n, p)
    mask.setflags(write=False)
    return mask


def boundary_shell_mass_fraction(f: Field, depth: float = 0.1) -> float:
    """Mass fraction in the outer ``depth`` of the box per axis.

    The box is approximating unbounded space; runs are only trusted while
    this fraction stays below 1e-8 (wrap-around contamination otherwise).
    """
    g = f.grid
    edge = g.half_width * (1.0 - 2.0 * depth)
    ax = np.abs(g.axis()) >= edge
    if g.d == 1:
        shell = ax
    else:
        shell = ax[:, None] | ax[None, :]
    w = np.abs(f.values) ** 2
    total = float(np.sum(w))
    if total == 0.0:
        return 0.0
    return float(np.sum(w[shell]) / total)
