"""Hot kernels for sliding-window mass scans.

Circular windowed sums over 1-d and 2-d weight arrays.  Two interchangeable
implementations: numba ``@njit`` rolling sums (default) and a pure-numpy
cumulative-sum path.  Set ``BLOWSCOPE_NO_NUMBA=1`` to force the numpy path
(also used automatically when numba is unavailable).  The two paths may
differ in the last float ulps; callers that need exact window values
re-verify candidates with direct summation (see diagnostics).

``benchmarks/bench_scan.py`` compares the two implementations.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BLOWSCOPE_NO_NUMBA", "").lower() in ("1", "true", "yes")

try:  # pragma: no cover - import guard
    if _DISABLED:
        raise ImportError("numba disabled by BLOWSCOPE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # fallback decorator, keeps the jit source importable
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _window_sums_1d_jit(w, m):
    n = w.shape[0]
    out = np.empty(n)
    s = 0.0
    for j in range(m):
        s += w[j]
    out[0] = s
    for i in range(1, n):
        s += w[(i + m - 1) % n] - w[i - 1]
        out[i] = s
    return out


@njit(cache=True)
def _window_sums_2d_jit(w, m):
    n0, n1 = w.shape
    rows = np.empty((n0, n1))
    for i in range(n0):
        s = 0.0
        for j in range(m):
            s += w[i, j]
        rows[i, 0] = s
        for j in range(1, n1):
            s += w[i, (j + m - 1) % n1] - w[i, j - 1]
            rows[i, j] = s
    out = np.empty((n0, n1))
    for j in range(n1):
        s = 0.0
        for i in range(m):
            s += rows[i, j]
        out[0, j] = s
        for i in range(1, n0):
            s += rows[(i + m - 1) % n0, j] - rows[i - 1, j]
            out[i, j] = s
    return out


def _window_sums_1d_np(w, m):
    n = w.shape[0]
    c = np.concatenate(([0.0], np.cumsum(np.concatenate((w, w[: m - 1] if m > 1 else w[:0])))))
    return c[m : m + n] - c[:n]


def _window_sums_2d_np(w, m):
    rows = _window_sums_axis_np(w, m, axis=1)
    return _window_sums_axis_np(rows, m, axis=0)


def _window_sums_axis_np(w, m, axis):
    n = w.shape[axis]
    pad = np.take(w, np.arange(m - 1), axis=axis) if m > 1 else np.take(w, [], axis=axis)
    ext = np.concatenate((w, pad), axis=axis)
    c = np.cumsum(ext, axis=axis)
    zero_shape = list(c.shape)
    zero_shape[axis] = 1
    c = np.concatenate((np.zeros(zero_shape), c), axis=axis)
    hi = np.take(c, np.arange(m, m + n), axis=axis)
    lo = np.take(c, np.arange(n), axis=axis)
    return hi - lo


def window_sums(w: np.ndarray, m: int, impl: str = "auto") -> np.ndarray:
    """Sum of w over every length-m circular window per axis.

    ``out[i...] = sum of w over the axis-aligned block of m cells per axis
    whose corner is i``, with periodic wrap.  ``impl`` is "auto", "numba"
    or "numpy" (the benchmark toggles it explicitly).
    """
    if not (1 <= m <= w.shape[0]):
        raise ValueError(f"window length {m} outside [1, {w.shape[0]}]")
    w = np.ascontiguousarray(w, dtype=np.float64)
    use_numba = HAVE_NUMBA if impl == "auto" else (impl == "numba")
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba implementation requested but numba is unavailable")
    if w.ndim == 1:
        return _window_sums_1d_jit(w, m) if use_numba else _window_sums_1d_np(w, m)
    if w.ndim == 2:
        if w.shape[0] != w.shape[1]:
            raise ValueError("2-d scans require a square array")
        return _window_sums_2d_jit(w, m) if use_numba else _window_sums_2d_np(w, m)
    raise ValueError(f"unsupported array rank {w.ndim}")
