"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import math

import numpy as np
import pytest

from conftest import J11_SQ, J21_SQ, PROFILES, PACMAN, HALF_DISK, make_mask, report_criterion
from polarlab import corpus
from polarlab.grid import boundary_of, build_grid
from polarlab.lab import ExperimentConfig, run
from polarlab.nodal import moving_polarization_experiment, nodal_boundary_distance, nodal_sets, normal_derivative_probe
from polarlab.polarization import GridFunction
from polarlab.spectral import EnergyConfig, SolverConfig, linear_eigenpairs, solve_first, solve_second
from polarlab.suite import run_properties

pytestmark = pytest.mark.slow

P2 = EnergyConfig(p=2.0)


def _suite(names, **kw):
    return {r.name: r for r in run_properties(seed=0, only=names, **kw)}


def test_bessel_half_disk():
    fast = SolverConfig(restarts=1)
    errs = {}
    for n_r, n_phi in [(128, 256), (256, 512)]:
        m = make_mask(HALF_DISK, n_r, n_phi)
        l1 = solve_first(m, P2, fast).lam
        l2 = solve_second(m, P2, fast).lam
        errs[n_r] = ((l1 - J11_SQ) / J11_SQ, (l2 - J21_SQ) / J21_SQ)
    within = all(abs(e) <= 0.02 for e in errs[128])
    ratios = [abs(a) / abs(b) for a, b in zip(errs[128], errs[256])]
    ok = within and all(r >= 2 for r in ratios)
    report_criterion(1, "half-disk Bessel eigenvalues", ok,
                     f"rel err 128x256 = {errs[128][0]:+.4%}, {errs[128][1]:+.4%}; "
                     f"refinement ratios = {ratios[0]:.3f}, {ratios[1]:.3f} (need >= 2)")
    assert within
    assert ok


def test_linear_oracle():
    grid = build_grid(0.0, 1.0, 24, 24)
    worst = 0.0
    for idx in range(10):
        rng = corpus.case_rng(0, "oracle", idx)
        m = corpus.random_profile_mask(rng, grid)
        if idx % 2:
            m = corpus.perturbed_mask(rng, m)
        (l1, _), (l2, _) = linear_eigenpairs(m, 2)
        a, b = solve_first(m, P2).lam, solve_second(m, P2).lam
        worst = max(worst, abs(a - l1) / l1, abs(b - l2) / l2)
    ok = worst <= 1e-4
    report_criterion(2, "linear oracle equivalence", ok, f"max rel diff {worst:.2e} over 10 masks")
    assert ok


def test_exact_rearrangement():
    res = _suite(["mass_exact", "sign_split_commutes"], functions=200)
    fails = sum(r.failures for r in res.values())
    checks = sum(r.checks for r in res.values())
    report_criterion(3, "mass and sign split exact", fails == 0, f"{fails} failures in {checks} checks")
    assert fails == 0


def test_energy_preservation():
    (r,) = _suite(["energy_preserved"], functions=200).values()
    detail = f"{r.failures}/{r.cases} functions fail"
    if r.witness:
        w = r.witness
        detail += (f"; witness {w['n_r']}x{w['n_phi']} p={w['p']} "
                   f"energy {w['energy_before']:.6g} -> {w['energy_after']:.6g}")
    report_criterion(4, "energy preservation", r.passed, detail)
    assert r.passed, detail


def test_symmetry_characterization():
    res = _suite(["symmetric_masks_accepted", "perturbed_masks_rejected"], masks=100, functions=1)
    fails = sum(r.failures for r in res.values())
    runs = sum(r.checks for r in res.values())
    ok = fails == 0 and runs == 600
    report_criterion(5, "symmetry characterization", ok, f"{fails} disagreements in {runs} classifier runs")
    assert ok


def test_monotonicity_and_support():
    res = _suite(["set_monotonicity", "support_containment"], functions=200)
    mono, supp = res["set_monotonicity"], res["support_containment"]
    ok = mono.passed and supp.passed and mono.cases == supp.cases == 200
    report_criterion(6, "set monotonicity and support containment", ok,
                     f"violations {mono.failures}/{mono.cases} pairs, {supp.failures}/{supp.cases} pairs")
    assert ok


def test_nodal_set_reaches_boundary():
    bad, lines, skipped = [], 0, 0
    for name, prof in PROFILES.items():
        for p in (1.5, 2.0, 3.0):
            dists = []
            for n_r, n_phi in [(32, 64), (64, 128)]:
                m = make_mask(prof, n_r, n_phi)
                res = solve_second(m, EnergyConfig(p=p), SolverConfig(restarts=2))
                if not res.converged:
                    skipped += 1
                    dists.append(None)
                    continue
                d = nodal_boundary_distance(nodal_sets(res.u, m), boundary_of(m))
                lines += 1
                dists.append(d)
                if d > 2 * m.grid.h:
                    bad.append(f"{name} p={p} {n_r}x{n_phi} d={d:.4f}")
            if None not in dists and dists[1] > dists[0]:
                bad.append(f"{name} p={p} grew {dists[0]:.4f}->{dists[1]:.4f}")
    ok = not bad
    report_criterion(7, "nodal set within 2h of boundary", ok,
                     f"{lines} converged solves, {skipped} unconverged; " + ("; ".join(bad) or "no violations"))
    assert ok


def _interior_nodal_u(mask, centre, width=0.02, level=0.3):
    g = mask.grid
    xy = g.cartesian()
    psi = np.sin(math.pi * np.minimum(g.r[:, None], 1.0)) * np.cos(g.phi[None, :] / 2)
    bump = np.exp(-((xy[..., 0] - centre[0]) ** 2 + (xy[..., 1] - centre[1]) ** 2) / width)
    return GridFunction(g, np.where(mask.inside, psi * (bump - level), 0.0), mask)


def test_moving_polarization():
    bad = []
    cases = 0
    # centres chosen so the nodal set of the input stays farther than 2h from the boundary
    inputs = [(PACMAN, c) for c in [(0.3, 0.35), (0.45, -0.2), (0.2, 0.5), (0.5, 0.1)]]
    inputs += [(HALF_DISK, c) for c in [(0.45, -0.2), (0.5, 0.1), (0.55, -0.05)]]
    for prof, centre in inputs:
        m = make_mask(prof, 32, 64)
        out = moving_polarization_experiment(m, _interior_nodal_u(m, centre), P2)
        cases += 1
        if out["skipped"]:
            bad.append(f"{centre} skipped")
            continue
        if not (out["support_in_domain"] and out["support_in_container"] and out["mass_preserved"]
                and out["dist_Zw_boundary"] <= out["two_h"]):
            bad.append(f"{centre} failed")
    ok = not bad
    report_criterion(8, "moving polarization consistency", ok,
                     f"{cases - len(bad)}/{cases} inputs with containment, exact mass, Z(w) within 2h")
    assert ok


def test_boundary_normal_derivative_sign():
    m = make_mask(HALF_DISK, 64, 128)
    res = solve_first(m, P2)
    arc = [c for c in boundary_of(m).cells if c[0] == m.grid.n_r]
    probes = normal_derivative_probe(res.u, m, arc)
    neg = sum(p.estimate < 0 for p in probes)
    ok = neg == len(probes) > 0
    report_criterion(9, "boundary normal derivative sign", ok, f"{neg}/{len(probes)} arc probes strictly negative")
    assert ok


def test_determinism(tmp_path):
    domain = {"center_a": 0.0, "r_max": 1.0, "n_r": 16, "n_phi": 32, "profile": [[1.0, 0.8 * math.pi]]}
    blobs = []
    for kind in ("nodal", "moving-polarization", "refinement-sweep"):
        for rep in range(2):
            out = tmp_path / f"{kind}-{rep}"
            cfg = ExperimentConfig(domain=domain, kind=kind, p_list=[1.5, 2.0],
                                   grid_list=[(16, 32), (24, 48)], output_dir=str(out))
            run(cfg)
            blobs.append((kind, (out / f"{kind}.csv").read_bytes()))
    same = all(blobs[i][1] == blobs[i + 1][1] for i in range(0, len(blobs), 2))
    report_criterion(10, "byte-identical CSV on rerun", same, f"{len(blobs) // 2} configs rerun")
    assert same
