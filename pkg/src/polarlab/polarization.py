"""Reflections and polarizations (two-point rearrangements) on the polar grid.

A plane ``H_theta`` through the symmetry center is stored by its half-step
index ``k`` with ``2 theta = k dphi``.  Reflection then acts on the angular
index alone, ``j -> (k - 1 - j) mod n_phi``, so every rearrangement below
is an exact permutation of cell values.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .grid import DomainMask, PolarGrid, as_cell_mask

__all__ = [
    "PolarizationPlane",
    "GridFunction",
    "plane",
    "lattice_planes",
    "reflect_index",
    "reflect_point",
    "side",
    "polarize_mask",
    "polarize_values",
    "polarize_function",
    "split_signs",
    "support_of",
    "is_circularly_symmetric",
]

P = "P"
P_TILDE = "P-tilde"

# 1 for the true reflection; the suite-sensitivity hook shifts it
_REFLECT_SHIFT = 1


@contextmanager
def broken_reflection():
    """Test-only hook: swap in an off-by-one reflection index."""
    global _REFLECT_SHIFT
    saved, _REFLECT_SHIFT = _REFLECT_SHIFT, 0
    try:
        yield
    finally:
        _REFLECT_SHIFT = saved


@dataclass(frozen=True)
class PolarizationPlane:
    grid: PolarGrid
    k: int

    @property
    def theta(self) -> float:
        return self.k * self.grid.dphi / 2.0

    def shifted(self, dk: int) -> "PolarizationPlane":
        return PolarizationPlane(self.grid, self.k + dk)


def plane(grid: PolarGrid, theta: float | None = None, *, k: int | None = None) -> PolarizationPlane:
    """Plane through ``(a, 0)`` at angle ``theta``; ``theta`` must be lattice aligned."""
    if k is None:
        if theta is None:
            raise ValueError("give theta or k")
        kf = 2.0 * theta / grid.dphi
        k = int(round(kf))
        if abs(kf - k) > 1e-9 * max(1.0, abs(kf)):
            raise ValueError(
                f"theta = {theta!r} is not on the half-step lattice (2 theta / dphi = {kf})"
            )
    return PolarizationPlane(grid, int(k))


def lattice_planes(grid: PolarGrid, lo: float, hi: float) -> list[PolarizationPlane]:
    """All lattice planes with ``lo <= theta <= hi``."""
    step = grid.dphi / 2.0
    k0 = math.ceil(lo / step - 1e-9)
    k1 = math.floor(hi / step + 1e-9)
    return [PolarizationPlane(grid, k) for k in range(k0, k1 + 1)]


def reflect_index(pl: PolarizationPlane) -> np.ndarray:
    """Angular index map of the reflection, shape ``(n_phi,)``."""
    n = pl.grid.n_phi
    return (pl.k - _REFLECT_SHIFT - np.arange(n)) % n


def reflect_point(pl: PolarizationPlane, cell: tuple[int, int]) -> tuple[int, int]:
    i, j = cell
    return int(i), int((pl.k - _REFLECT_SHIFT - j) % pl.grid.n_phi)


def side(pl: PolarizationPlane) -> np.ndarray:
    """Per angular index: ``+1`` in Sigma+, ``-1`` in Sigma-, ``0`` on H_theta.

    Sigma+ is where ``sin(theta - phi) > 0``; with ``theta - phi_j =
    pi + (k - 2j - 1) dphi / 2`` the sign is decided by integer arithmetic.
    """
    n = pl.grid.n_phi
    m = (pl.k - 2 * np.arange(n) - 1) % (2 * n)
    out = np.zeros(n, dtype=int)
    out[(m > n)] = 1
    out[(m > 0) & (m < n)] = -1
    return out


def polarize_values(values: np.ndarray, pl: PolarizationPlane, variant: str = P) -> np.ndarray:
    """Polarize a raw ``(n_r + 1, n_phi)`` array (booleans polarize as sets)."""
    if variant not in (P, P_TILDE):
        raise ValueError(f"unknown variant {variant!r}")
    refl = values[:, reflect_index(pl)]
    s = side(pl)
    lo = np.minimum(values, refl)
    hi = np.maximum(values, refl)
    if variant == P_TILDE:
        lo, hi = hi, lo
    out = np.where(s[None, :] > 0, lo, hi)
    on_h = s == 0
    out[:, on_h] = values[:, on_h]
    return out


def polarize_mask(mask, pl: PolarizationPlane, variant: str = P) -> np.ndarray:
    """Polarized cell set; returned raw since it may be disconnected."""
    inside = as_cell_mask(pl.grid, mask)
    return polarize_values(inside.astype(bool), pl, variant)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real field over a polar grid, zero outside ``mask`` when one is attached."""

    grid: PolarGrid
    values: np.ndarray
    mask: DomainMask | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.mask)

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, c):
        return self.with_values(c * self.values)

    __rmul__ = __mul__

    def __add__(self, other):
        return self.with_values(self.values + other.values)


def polarize_function(v: GridFunction, pl: PolarizationPlane, variant: str = P) -> GridFunction:
    # the polarized function need not vanish outside the original mask
    return GridFunction(v.grid, polarize_values(v.values, pl, variant))


def split_signs(v: GridFunction) -> tuple[GridFunction, GridFunction]:
    """``(v+, v-)`` with ``v+ = max(v, 0)`` and ``v- = min(v, 0)``."""
    return (
        v.with_values(np.maximum(v.values, 0.0)),
        v.with_values(np.minimum(v.values, 0.0)),
    )


def support_of(v: GridFunction) -> np.ndarray:
    return np.abs(v.values) > 0


_CONDITIONS = ("i", "ii", "iii")


def _symmetry_checks(grid: PolarGrid, condition: str):
    n = grid.n_phi
    if condition == "i":
        return [(k, P) for k in range(-n // 2, 1)] + [(k, P_TILDE) for k in range(0, n // 2 + 1)]
    if condition == "ii":
        return [(k, P) for k in range(-n, 1)]
    if condition == "iii":
        return [(k, P_TILDE) for k in range(0, n + 1)]
    raise ValueError(f"condition must be one of {_CONDITIONS}")


def is_circularly_symmetric(mask, condition: str = "iii", grid: PolarGrid | None = None):
    """Polarization test for circular symmetry about the positive axis ray.

    ``condition`` selects the family of lattice polarizations that must fix
    the set: ``"i"`` (P on [-pi/2, 0] and P-tilde on [0, pi/2]), ``"ii"``
    (P on [-pi, 0]) or ``"iii"`` (P-tilde on [0, pi]).

    Returns ``(True, None)`` or ``(False, (theta, (i, j)))`` with the first
    violating plane and cell.
    """
    grid = mask.grid if isinstance(mask, DomainMask) else grid
    if grid is None:
        raise ValueError("grid required for raw cell sets")
    inside = as_cell_mask(grid, mask)
    for k, variant in _symmetry_checks(grid, condition):
        pl = PolarizationPlane(grid, k)
        diff = polarize_values(inside, pl, variant) != inside
        if diff.any():
            i, j = np.argwhere(diff)[0]
            return False, (pl.theta, (int(i), int(j)))
    return True, None
