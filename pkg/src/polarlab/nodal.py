"""Nodal sets, reflection angles and the moving-polarization experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .grid import DomainError, DomainMask, boundary_of, cell_distance, neighbor_any, as_cell_mask
from .polarization import (
    P,
    P_TILDE,
    GridFunction,
    PolarizationPlane,
    polarize_function,
    polarize_mask,
    reflect_index,
    split_signs,
    support_of,
)
from .spectral import EnergyConfig, energy, mass, rayleigh

__all__ = [
    "NodalError",
    "NodalReport",
    "ZERO_THRESHOLD",
    "nodal_sets",
    "nodal_boundary_distance",
    "theta_of_point",
    "theta_index_field",
    "theta_star",
    "moving_polarization_experiment",
    "normal_derivative_probe",
]

ZERO_THRESHOLD = 1e-6


class NodalError(ValueError):
    pass


class Probe(NamedTuple):
    cell: tuple[int, int]
    estimate: float
    orientation: str


@dataclass
class NodalReport:
    grid: object = field(repr=False)
    zero_cells: np.ndarray = field(repr=False)
    plus_cells: np.ndarray = field(repr=False)
    minus_cells: np.ndarray = field(repr=False)
    tau: float
    fat_nodal_flag: bool
    dist_to_boundary: float | None = None
    theta_star: float | None = None
    theta_index: int | None = None
    y_cells: np.ndarray | None = field(default=None, repr=False)
    y_boundary_cells: np.ndarray | None = field(default=None, repr=False)
    singleton_y: bool = False
    degenerate: bool = False
    flipped: bool = False
    normal_derivative_probes: list = field(default_factory=list, repr=False)
    assumptions: dict = field(
        default_factory=lambda: {"interior_ball_regularity": "assumed", "exterior_ball": "assumed"}
    )

    def to_dict(self) -> dict:
        def cells(a):
            return None if a is None else [list(map(int, c)) for c in np.argwhere(a)]

        return {
            "grid": self.grid.descriptor(),
            "tau": self.tau,
            "counts": {
                "zero": int(self.zero_cells.sum()),
                "plus": int(self.plus_cells.sum()),
                "minus": int(self.minus_cells.sum()),
            },
            "fat_nodal_flag": self.fat_nodal_flag,
            "dist_to_boundary": self.dist_to_boundary,
            "theta_star": self.theta_star,
            "theta_uncertainty": self.grid.dphi / 2,
            "y_cells": cells(self.y_cells),
            "y_boundary_cells": cells(self.y_boundary_cells),
            "singleton_y": self.singleton_y,
            "degenerate": self.degenerate,
            "flipped": self.flipped,
            "normal_derivative_probes": [
                {"cell": list(p.cell), "estimate": p.estimate, "orientation": p.orientation}
                for p in self.normal_derivative_probes
            ],
            "assumptions": self.assumptions,
        }


def _sign_change_endpoints(plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """Cells at either end of a 4-adjacent plus/minus edge (wraparound in j)."""
    out = np.zeros_like(plus)
    for a, b in ((plus, minus), (minus, plus)):
        # angular edges (j, j+1)
        e = a & np.roll(b, -1, axis=1)
        out |= e | np.roll(e, 1, axis=1)
        # radial edges (i, i+1)
        e = a[:-1] & b[1:]
        out[:-1] |= e
        out[1:] |= e
    return out


def nodal_sets(u: GridFunction, mask: DomainMask | None = None, tau_rel: float = ZERO_THRESHOLD) -> NodalReport:
    """Sign classification of the inside cells.

    Plus/minus cells have ``|u| > tau``; the zero set collects the remaining
    cells and both endpoints of every sign-change edge, so the three sets
    partition the inside cells.
    """
    mask = mask or u.mask
    inside = mask.inside
    v = u.values
    vmax = float(np.abs(v[inside]).max()) if inside.any() else 0.0
    if vmax == 0:
        raise NodalError("no sign information (u is identically zero)")
    tau = tau_rel * vmax
    plus0 = inside & (v > tau)
    minus0 = inside & (v < -tau)
    small = inside & ~plus0 & ~minus0
    zero = small | (_sign_change_endpoints(plus0, minus0) & inside)
    block = small[:-1] & small[1:]
    fat = bool((block & np.roll(block, -1, axis=1)).any())
    return NodalReport(
        grid=mask.grid,
        zero_cells=zero,
        plus_cells=plus0 & ~zero,
        minus_cells=minus0 & ~zero,
        tau=tau,
        fat_nodal_flag=fat,
    )


def nodal_boundary_distance(report: NodalReport, boundary) -> float:
    if not report.zero_cells.any():
        raise NodalError("empty nodal set")
    return cell_distance(report.grid, report.zero_cells, boundary)


def theta_index_field(mask: DomainMask) -> np.ndarray:
    """Per inside cell, the smallest ``k >= 1`` whose reflection leaves the domain.

    Cells whose reflections never leave for ``k <= n_phi`` get ``-1``.
    """
    grid = mask.grid
    inside = mask.inside
    n = grid.n_phi
    out = np.full(grid.shape, -1)
    pending = inside.copy()
    for k in range(1, n + 1):
        refl = (k - 1 - np.arange(n)) % n
        hit = pending & ~inside[:, refl]
        out[hit] = k
        pending &= ~hit
        if not pending.any():
            break
    return out


def theta_of_point(mask: DomainMask, cell: tuple[int, int]) -> float:
    i, j = cell
    if not mask.inside[i, j]:
        raise DomainError(f"cell {cell} is not inside the mask")
    n = mask.grid.n_phi
    for k in range(1, n + 1):
        if not mask.inside[i, (k - 1 - j) % n]:
            return k * mask.grid.dphi / 2
    raise DomainError(f"reflections of {cell} never leave the domain: ring {i} is a full circle")


def _boundary_layer(mask: DomainMask) -> np.ndarray:
    return mask.inside & neighbor_any(~mask.inside)


def _neighbors8(cells: np.ndarray) -> np.ndarray:
    out = np.zeros_like(cells)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            s = np.roll(cells, dj, axis=1)
            if di == 1:
                out[1:] |= s[:-1]
            elif di == -1:
                out[:-1] |= s[1:]
            else:
                out |= s
    return out


def _oriented(report: NodalReport, mask: DomainMask) -> NodalReport:
    """Flip roles so the minus sign owns the boundary layer."""
    layer = _boundary_layer(mask)
    plus_touch = bool((report.plus_cells & layer).any())
    minus_touch = bool((report.minus_cells & layer).any())
    if plus_touch and minus_touch:
        raise NodalError("no sign is interior: both signs reach the boundary layer")
    if plus_touch:
        return replace(report, plus_cells=report.minus_cells, minus_cells=report.plus_cells, flipped=True)
    return report


def theta_star(mask: DomainMask, report: NodalReport):
    """Smallest reflection angle over closure(plus) and Z; also returns Y and its boundary.

    Returns ``(theta, y_cells, y_boundary_cells, report)``; the report is
    oriented (``flipped`` set if the signs were swapped) and carries the
    computed fields.
    """
    rep = _oriented(report, mask)
    cand = rep.plus_cells | rep.zero_cells
    if not cand.any():
        raise NodalError("no plus or zero cells")
    K = theta_index_field(mask)
    kc = K[cand]
    if np.any(kc < 0):
        raise DomainError("reflections never leave the domain (a ring is a full circle)")
    kstar = int(kc.min())
    theta = kstar * mask.grid.dphi / 2
    argmin = cand & (K == kstar)
    y = argmin & rep.zero_cells
    rest = rep.zero_cells & ~y
    y_bnd = y & _neighbors8(rest)
    if rep.dist_to_boundary is None:
        dist = nodal_boundary_distance(rep, boundary_of(mask)) if rep.zero_cells.any() else math.inf
    else:
        dist = rep.dist_to_boundary
    rep = replace(
        rep,
        theta_star=theta,
        theta_index=kstar,
        y_cells=y,
        y_boundary_cells=y_bnd,
        singleton_y=int(y.sum()) == 1,
        dist_to_boundary=dist,
        degenerate=dist <= 2 * mask.grid.h,
    )
    return theta, y, y_bnd, rep


def normal_derivative_probe(w: GridFunction, mask: DomainMask, boundary_cells) -> list[Probe]:
    """One-sided estimates of the outward normal derivative at boundary cells.

    The boundary cell carries the Dirichlet value 0.  With the two inward
    cells ``f1, f2`` at distances ``h, 2h`` the estimate is
    ``(3*0 - 4 f1 + f2) / (2h)``; first order when the second cell is missing.
    """
    grid = mask.grid
    inside = mask.inside
    bnd = boundary_of(mask).as_mask()
    V = w.values
    n = grid.n_phi
    out = []
    for i, j in np.argwhere(as_cell_mask(grid, boundary_cells)):
        if not bnd[i, j]:
            raise DomainError(f"probe cell ({i}, {j}) is not a boundary cell")
        if i >= 1 and inside[i - 1, j]:
            steps, h, kind = [(i - 1, j), (i - 2, j)], grid.dr, "radial"
        elif i + 1 < grid.shape[0] and inside[i + 1, j]:
            steps, h, kind = [(i + 1, j), (i + 2, j)], grid.dr, "radial-inner"
        else:
            d = -1 if inside[i, (j - 1) % n] else 1
            steps = [(i, (j + d) % n), (i, (j + 2 * d) % n)]
            h, kind = grid.r[i] * grid.dphi, "angular"
        f1 = V[steps[0]]
        (a, b) = steps[1]
        if 0 <= a < grid.shape[0] and inside[a, b]:
            est = (-4.0 * f1 + V[a, b]) / (2.0 * h)
        else:
            est = -f1 / h
        out.append(Probe((int(i), int(j)), float(est), kind))
    return out


def moving_polarization_experiment(
    mask: DomainMask,
    u: GridFunction,
    cfg: EnergyConfig,
    lam: float | None = None,
    theta: float | None = None,
    rtol: float = 1e-6,
) -> dict:
    """Polarize ``u`` at the last lattice angle before its closure(plus) ∪ Z meets the boundary.

    Skipped (with ``skipped`` set and a message) when the nodal set already
    lies within ``2h`` of the boundary.  Passing ``theta`` forces the
    polarization angle and bypasses the hypothesis check.
    """
    grid = mask.grid
    h2 = 2 * grid.h
    boundary = boundary_of(mask)
    rep = nodal_sets(u, mask)
    dist = nodal_boundary_distance(rep, boundary) if rep.zero_cells.any() else math.inf
    rep.dist_to_boundary = dist
    out: dict = {"dist_Z_boundary": dist, "two_h": h2, "skipped": False, "message": ""}

    if theta is None:
        if dist <= h2:
            out.update(skipped=True, message="nodal set within 2h of the boundary; "
                       "interior-nodal-set hypothesis absent; experiment skipped")
            return out
        try:
            th, y, y_bnd, rep = theta_star(mask, rep)
        except NodalError as exc:
            out.update(skipped=True, message=f"{exc}; experiment skipped")
            return out
        k_pol = rep.theta_index - 1
        out.update(
            theta_star=th,
            theta_polarized=k_pol * grid.dphi / 2,
            y_count=int(y.sum()),
            y_boundary_count=int(y_bnd.sum()),
            singleton_y=rep.singleton_y,
            flipped=rep.flipped,
        )
    else:
        try:
            rep = _oriented(rep, mask)
        except NodalError:
            pass  # a forced angle needs no sign convention
        k_pol = int(round(2 * theta / grid.dphi))
        out.update(theta_star=None, theta_polarized=k_pol * grid.dphi / 2, flipped=rep.flipped)

    uu = -u if rep.flipped else u
    uu = GridFunction(grid, uu.values, mask)
    pl = PolarizationPlane(grid, k_pol)
    wfun = polarize_function(uu, pl)
    up, um = split_signs(uu)
    wp, wm = split_signs(wfun)

    sup = support_of(wfun)
    container = polarize_mask(up.values > 0, pl, P) | polarize_mask(um.values < 0, pl, P_TILDE)
    out["support_in_domain"] = bool(not (sup & ~mask.inside).any())
    out["support_in_container"] = bool(not (sup & ~container).any())

    m = {k: mass(f, cfg) for k, f in (("u+", up), ("u-", um), ("w+", wp), ("w-", wm))}
    e = {k: energy(f, cfg) for k, f in (("u+", up), ("u-", um), ("w+", wp), ("w-", wm))}
    out["mass"] = m
    out["energy"] = e
    out["mass_preserved"] = m["u+"] == m["w+"] and m["u-"] == m["w-"]
    eps = np.finfo(float).eps
    out["energy_rel_change"] = {
        s: (e["w" + s] - e["u" + s]) / e["u" + s] if e["u" + s] else 0.0 for s in "+-"
    }
    out["energy_preserved"] = all(
        abs(e["w" + s] - e["u" + s]) <= 10 * eps * e["u" + s] for s in "+-"
    )

    wgf = GridFunction(grid, wfun.values, mask) if out["support_in_domain"] else wfun
    wrep = nodal_sets(wgf, mask)
    dist_w = nodal_boundary_distance(wrep, boundary) if wrep.zero_cells.any() else math.inf
    out["dist_Zw_boundary"] = dist_w
    out["touches_boundary"] = dist_w <= h2

    lam_ref = lam if lam is not None else rayleigh(uu, cfg)
    rq = {s: rayleigh(f, cfg) if mass(f, cfg) > 0 else math.nan for s, f in (("+", wp), ("-", wm))}
    out["rayleigh_w"] = rq
    out["lambda_ref"] = lam_ref
    out["minimizer_consistent"] = all(abs(q - lam_ref) <= rtol * lam_ref for q in rq.values())

    if theta is None and out["support_in_domain"]:
        # probe at the contact cells sigma(Y) and their boundary neighbours
        refl = reflect_index(PolarizationPlane(grid, k_pol + 1))
        contact = np.zeros(grid.shape, dtype=bool)
        yc = np.argwhere(rep.y_cells)
        contact[yc[:, 0], refl[yc[:, 1]]] = True
        near = (contact | _neighbors8(contact)) & boundary.as_mask()
        probes = normal_derivative_probe(wgf, mask, near) if near.any() else []
        out["probes"] = [{"cell": list(p.cell), "estimate": p.estimate, "orientation": p.orientation} for p in probes]
    out["w"] = wfun
    return out
