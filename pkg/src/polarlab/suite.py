"""Seeded property suite for polarization and nodal-set invariants.

Every property is checked case by case on freshly generated inputs.  A
failing case is regenerated from the same random stream on successively
halved grids; the smallest grid that still fails is reported as witness.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import corpus
from .grid import PolarGrid, build_grid
from .nodal import nodal_sets, theta_index_field
from .polarization import (
    P,
    P_TILDE,
    PolarizationPlane,
    broken_reflection,
    is_circularly_symmetric,
    polarize_function,
    polarize_values,
    reflect_index,
    split_signs,
    support_of,
)
from .spectral import EnergyConfig, energy, mass

__all__ = ["PropertyResult", "PROPERTIES", "run_properties", "lsc_violations"]

EPS = np.finfo(float).eps
_P_CYCLE = (1.5, 2.0, 3.0)


@dataclass
class PropertyResult:
    name: str
    family: str
    cases: int = 0
    checks: int = 0
    failures: int = 0
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def row(self) -> dict:
        return {
            "property": self.name,
            "cases": self.cases,
            "checks": self.checks,
            "failures": self.failures,
            "passed": self.passed,
            "witness": self.witness,
        }


def _planes(grid: PolarGrid):
    n = grid.n_phi
    return [PolarizationPlane(grid, k) for k in range(-n, n + 1)]


# Each check takes (rng, grid) and returns (checks, failure-detail or None).


def _involution(rng, grid):
    ident = np.arange(grid.n_phi)
    for pl in _planes(grid):
        refl = reflect_index(pl)
        bad = np.flatnonzero(refl[refl] != ident)
        if bad.size:
            return 1, {"theta": pl.theta, "j": int(bad[0])}
    return len(_planes(grid)), None


def _pair_loop(fn):
    def check(rng, grid):
        v = corpus.random_function(rng, grid)
        cfg = EnergyConfig(p=_P_CYCLE[int(rng.integers(3))])
        n = 0
        for pl in _planes(grid):
            for variant in (P, P_TILDE):
                n += 1
                detail = fn(v, pl, variant, cfg)
                if detail is not None:
                    return n, {"theta": pl.theta, "variant": variant, **detail}
        return n, None

    return check


@_pair_loop
def _mass_exact(v, pl, variant, cfg):
    w = polarize_function(v, pl, variant)
    for name, a, b in zip(("+", "-"), split_signs(v), split_signs(w)):
        ma, mb = mass(a, cfg), mass(b, cfg)
        if ma != mb:
            return {"sign": name, "mass_before": ma, "mass_after": mb}
    return None


@_pair_loop
def _split_commutes(v, pl, variant, cfg):
    w = polarize_function(v, pl, variant)
    for name, ws, vs in zip(("+", "-"), split_signs(w), split_signs(v)):
        diff = ws.values != polarize_values(vs.values, pl, variant)
        if diff.any():
            return {"sign": name, "cell": [int(c) for c in np.argwhere(diff)[0]]}
    return None


@_pair_loop
def _complementary(v, pl, variant, cfg):
    if variant != P:
        return None
    t = polarize_values(v.values, pl, P_TILDE)
    for other in (polarize_values(v.values, pl.shifted(pl.grid.n_phi), P),
                  -polarize_values(-v.values, pl, P)):
        diff = t != other
        if diff.any():
            return {"cell": [int(c) for c in np.argwhere(diff)[0]]}
    return None


def _energy_check(family=corpus.random_function):
    def check(rng, grid):
        v = family(rng, grid)
        cfg = EnergyConfig(p=_P_CYCLE[int(rng.integers(3))])
        e0 = energy(v, cfg)
        n = 0
        for pl in _planes(grid):
            for variant in (P, P_TILDE):
                n += 1
                e1 = energy(polarize_function(v, pl, variant), cfg)
                if abs(e1 - e0) > 10 * EPS * e0:
                    return n, {"theta": pl.theta, "variant": variant, "p": cfg.p,
                               "energy_before": e0, "energy_after": e1}
        return n, None

    return check


def _set_monotone(rng, grid):
    a, b = corpus.nested_pair(rng, grid)
    n = 0
    for pl in _planes(grid):
        for variant in (P, P_TILDE):
            n += 1
            pa = polarize_values(a, pl, variant)
            pb = polarize_values(b, pl, variant)
            bad = pa & ~pb
            if bad.any():
                return n, {"theta": pl.theta, "variant": variant,
                           "cell": [int(c) for c in np.argwhere(bad)[0]]}
    return n, None


def _symmetry(expected: bool):
    def check(rng, grid):
        mask = corpus.random_profile_mask(rng, grid)
        if not expected:
            mask = corpus.perturbed_mask(rng, mask)
        verdicts = {}
        for cond in ("i", "ii", "iii"):
            verdicts[cond] = is_circularly_symmetric(mask, cond)[0]
        if any(v != expected for v in verdicts.values()):
            return 3, {"expected": expected, "verdicts": verdicts}
        return 3, None

    return check


def _support(rng, grid):
    v = corpus.random_function(rng, grid)
    pl = PolarizationPlane(grid, int(rng.integers(-grid.n_phi, grid.n_phi + 1)))
    variant = P if rng.random() < 0.5 else P_TILDE
    w = polarize_function(v, pl, variant)
    container = polarize_values(v.values > 0, pl, P) | polarize_values(v.values < 0, pl, P_TILDE)
    # the sign-split identity makes the container the same for either variant of w
    if variant == P_TILDE:
        container = polarize_values(v.values > 0, pl, P_TILDE) | polarize_values(v.values < 0, pl, P)
    bad = support_of(w) & ~container
    if bad.any():
        return 1, {"theta": pl.theta, "variant": variant, "cell": [int(c) for c in np.argwhere(bad)[0]]}
    return 1, None


def _partition(rng, grid):
    v = corpus.random_function(rng, grid)
    rep = nodal_sets(v, v.mask)
    count = rep.plus_cells.astype(int) + rep.minus_cells + rep.zero_cells
    bad = (count != v.mask.inside.astype(int))
    if bad.any():
        return 1, {"cell": [int(c) for c in np.argwhere(bad)[0]]}
    return 1, None


def _theta_growth(rng, grid):
    small, large = corpus.nested_profile_pair(rng, grid)
    # -1 marks "never leaves"; treat it as +infinity
    ks, kl = (np.where(k < 0, np.inf, k) for k in (theta_index_field(small), theta_index_field(large)))
    bad = small.inside & (ks > kl)
    if bad.any():
        c = tuple(int(x) for x in np.argwhere(bad)[0])
        return 1, {"cell": list(c), "theta_small": float(ks[c] * grid.dphi / 2),
                   "theta_large": float(kl[c] * grid.dphi / 2)}
    return 1, None


def lsc_violations(mask, c: float = 2.0) -> np.ndarray:
    """Cells whose reflection angle exceeds a neighbour's by more than the allowed slack.

    The slack is ``c dphi`` plus, across rings, half the jump of the
    discrete half-angle between the two rings (the reflection exit point
    moves with the boundary).
    """
    grid = mask.grid
    K = theta_index_field(mask).astype(float)
    K[~mask.inside | (K < 0)] = np.inf
    half = c * 2  # c dphi in half-steps
    width = mask.inside.sum(axis=1)
    ang = np.minimum(np.roll(K, 1, axis=1), np.roll(K, -1, axis=1)) + half
    bound = ang.copy()
    # half-angle jump of (width/2) dphi, halved again, in half-steps: |dw|/2
    jump = np.abs(np.diff(width)) / 2.0
    bound[1:] = np.minimum(bound[1:], K[:-1] + half + jump[:, None])
    bound[:-1] = np.minimum(bound[:-1], K[1:] + half + jump[:, None])
    return mask.inside & np.isfinite(K) & (K > bound)


def _theta_lsc(rng, grid):
    mask = corpus.random_profile_mask(rng, grid)
    bad = lsc_violations(mask)
    if bad.any():
        K = theta_index_field(mask)
        c = tuple(int(x) for x in np.argwhere(bad)[0])
        return 1, {"cell": list(c), "theta": float(K[c] * grid.dphi / 2)}
    return 1, None


# name -> (corpus family, size key, check)
PROPERTIES: dict[str, tuple[str, str, Callable]] = {
    "reflection_involution": ("functions", "functions", _involution),
    "mass_exact": ("functions", "functions", _mass_exact),
    "sign_split_commutes": ("functions", "functions", _split_commutes),
    "complementary_variant": ("functions", "functions", _complementary),
    "energy_preserved": ("functions", "functions", _energy_check()),
    "energy_preserved_cap_symmetric": ("caps", "functions", _energy_check(corpus.cap_symmetric_function)),
    "set_monotonicity": ("nested", "functions", _set_monotone),
    "symmetric_masks_accepted": ("masks", "masks", _symmetry(True)),
    "perturbed_masks_rejected": ("masks", "masks", _symmetry(False)),
    "support_containment": ("support", "functions", _support),
    "nodal_partition": ("functions", "functions", _partition),
    "theta_monotone_under_growth": ("nested-profiles", "masks", _theta_growth),
    "theta_lower_semicontinuous": ("masks", "masks", _theta_lsc),
}


def _halve(grid: PolarGrid) -> PolarGrid | None:
    nr, nphi = grid.n_r // 2, grid.n_phi // 2
    if nr < 8 or nphi < 8 or nphi % 2:
        return None
    return build_grid(grid.center_a, grid.r_max, nr, nphi)


def _minimize(seed, family, idx, check, grid, detail):
    best = {"n_r": grid.n_r, "n_phi": grid.n_phi, "case": idx, **detail}
    g = _halve(grid)
    while g is not None:
        _, d = check(corpus.case_rng(seed, family, idx), g)
        if d is None:
            break
        best = {"n_r": g.n_r, "n_phi": g.n_phi, "case": idx, **d}
        g = _halve(g)
    return best


def run_properties(
    seed: int = 0,
    masks: int = 100,
    functions: int = 200,
    grid: PolarGrid | None = None,
    only: list[str] | None = None,
    mutate_reflection: bool = False,
) -> list[PropertyResult]:
    if masks < 1 or functions < 1:
        raise ValueError("corpus sizes must be >= 1")
    grid = grid or build_grid(0.0, 1.0, 32, 32)
    sizes = {"masks": masks, "functions": functions}
    ctx = broken_reflection() if mutate_reflection else contextlib.nullcontext()
    out = []
    with ctx:
        for name, (family, size_key, check) in PROPERTIES.items():
            if only and name not in only:
                continue
            res = PropertyResult(name, family)
            for idx in range(sizes[size_key]):
                n, detail = check(corpus.case_rng(seed, family, idx), grid)
                res.cases += 1
                res.checks += n
                if detail is not None:
                    res.failures += 1
                    if res.witness is None:
                        res.witness = _minimize(seed, family, idx, check, grid, detail)
            out.append(res)
    return out
