"""Shared helpers: independent oracles kept deliberately naive."""

from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from blowscope import Field, Grid


def random_field(grid: Grid, rng) -> Field:
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, vals)


def l2_norm(field: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2) * field.grid.cell_volume))


def rel_l2_error(a: Field, b: Field) -> float:
    num = np.sqrt(np.sum(np.abs(a.values - b.values) ** 2))
    den = np.sqrt(np.sum(np.abs(b.values) ** 2))
    return float(num / den)


def brute_force_scan(weights: np.ndarray, m: int):
    """Exhaustive wrapped-window search; the reference the fast scan must
    match bit for bit (value and lexicographic tie-break)."""
    n = weights.shape[0]
    d = weights.ndim
    best_val = -np.inf
    best_corner = None
    for corner in product(range(n), repeat=d):
        idx = [np.arange(c, c + m) % n for c in corner]
        val = float(weights[np.ix_(*idx)].sum())
        if val > best_val:
            best_val = val
            best_corner = corner
    return best_val, best_corner


@pytest.fixture(scope="session")
def gs1():
    from blowscope import ground_state

    return ground_state(1)


@pytest.fixture(scope="session")
def gs2():
    from blowscope import ground_state

    return ground_state(2)
