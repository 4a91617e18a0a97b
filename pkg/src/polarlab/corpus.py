"""Seeded random masks and functions for property suites."""

from __future__ import annotations

import math

import numpy as np

from .grid import DomainError, DomainMask, PolarGrid, RadialProfile, mask_from_profile, neighbor_any
from .polarization import GridFunction

__all__ = [
    "case_rng",
    "random_profile",
    "random_profile_mask",
    "perturbed_mask",
    "nested_pair",
    "nested_profile_pair",
    "random_function",
    "cap_symmetric_function",
]


def case_rng(seed: int, family: str, index: int) -> np.random.Generator:
    """Independent stream per (seed, family, case) so cases regenerate on any grid."""
    tag = int.from_bytes(family.encode()[:8].ljust(8, b"\0"), "little")
    return np.random.default_rng([seed, tag, index])


def random_profile(rng: np.random.Generator, grid: PolarGrid) -> RadialProfile:
    """Piecewise-linear half-angle with 1 to 4 control points.

    Half-angles stay above two angular steps so every ring below the last
    radius contains the cells next to the axis ray (connectedness), and two
    steps below pi so no ring is a full circle.
    """
    k = int(rng.integers(1, 5))
    r_last = grid.r_max * rng.uniform(0.45, 1.0)
    radii = np.sort(rng.uniform(0.05, 1.0, size=k - 1)) * r_last if k > 1 else np.array([])
    radii = np.unique(np.append(radii, r_last))
    lo = 2 * grid.dphi
    betas = rng.uniform(lo, min(0.97 * math.pi, math.pi - lo), size=len(radii))
    return RadialProfile(list(zip(radii.tolist(), betas.tolist())))


def random_profile_mask(rng: np.random.Generator, grid: PolarGrid) -> DomainMask:
    return mask_from_profile(grid, random_profile(rng, grid))


def perturbed_mask(rng: np.random.Generator, mask: DomainMask, tries: int = 100) -> DomainMask:
    """Add or remove one cell next to the boundary, keeping a valid mask."""
    inside = mask.inside
    addable = neighbor_any(inside) & ~inside
    addable[-1] = False
    removable = inside & neighbor_any(~inside)
    for _ in range(tries):
        pool = addable if rng.random() < 0.5 else removable
        cells = np.argwhere(pool)
        if len(cells) == 0:
            continue
        i, j = cells[rng.integers(len(cells))]
        new = inside.copy()
        new[i, j] = not new[i, j]
        try:
            return DomainMask(mask.grid, new)
        except DomainError:
            continue
    raise DomainError("could not perturb mask")


def nested_pair(rng: np.random.Generator, grid: PolarGrid) -> tuple[np.ndarray, np.ndarray]:
    """Raw cell sets ``A ⊆ B``: a profile mask and a random thinning of it."""
    outer = random_profile_mask(rng, grid).inside
    inner = outer & (rng.random(grid.shape) < rng.uniform(0.3, 0.95))
    return inner, outer.copy()


def nested_profile_pair(rng: np.random.Generator, grid: PolarGrid) -> tuple[DomainMask, DomainMask]:
    """Profile masks ``small ⊆ large`` from a pointwise-scaled half-angle."""
    prof = random_profile(rng, grid)
    c = rng.uniform(0.3, 1.0)
    lo = 2 * grid.dphi
    small = RadialProfile([(r, max(lo, c * b)) for r, b in prof.control_points])
    large, inner = mask_from_profile(grid, prof), mask_from_profile(grid, small)
    inner = DomainMask(grid, inner.inside & large.inside)
    return inner, large


def random_function(rng: np.random.Generator, grid: PolarGrid) -> GridFunction:
    """Random sign-changing values on a random profile mask (rough or smooth)."""
    mask = random_profile_mask(rng, grid)
    v = rng.standard_normal(grid.shape)
    if rng.random() < 0.5:
        # low-frequency field
        r = grid.r[:, None] / grid.r_max
        phi = grid.phi[None, :]
        v = sum(
            rng.standard_normal() * np.cos(a * math.pi * r + rng.uniform(0, 2 * math.pi))
            * np.cos(b * phi + rng.uniform(0, 2 * math.pi))
            for a, b in rng.integers(0, 4, size=(4, 2))
        )
    return GridFunction(grid, np.where(mask.inside, v, 0.0), mask)


def cap_symmetric_function(rng: np.random.Generator, grid: PolarGrid) -> GridFunction:
    """Symmetric about the axis ray and monotone in ``|phi|`` on every ring.

    Values are single-signed so the zeros outside the mask keep each ring
    profile monotone; polarization then acts as a plain reflection.
    """
    mask = random_profile_mask(rng, grid)
    nr, n = grid.shape
    half = np.cumsum(rng.exponential(size=(nr, n // 2)), axis=1)[:, ::-1]
    v = np.concatenate([half[:, ::-1], half], axis=1)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return GridFunction(grid, np.where(mask.inside, sign * v, 0.0), mask)
