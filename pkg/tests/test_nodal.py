import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import HALF_DISK, PACMAN, PROFILES, TAPERED_SECTOR, make_mask
from polarlab import corpus
from polarlab.grid import DomainError, boundary_of, build_grid
from polarlab.io import to_jsonable
from polarlab.nodal import (
    NodalError,
    moving_polarization_experiment,
    nodal_boundary_distance,
    nodal_sets,
    normal_derivative_probe,
    theta_index_field,
    theta_of_point,
    theta_star,
)
from polarlab.polarization import GridFunction
from polarlab.spectral import EnergyConfig, SolverConfig, mass, solve_first, solve_second
from polarlab.suite import lsc_violations

seeds = st.integers(0, 2**31 - 1)


def _interior_nodal_u(mask, centre=(0.3, 0.35), width=0.02, level=0.3):
    """psi (bump - level): negative near the boundary, positive on an interior blob."""
    g = mask.grid
    xy = g.cartesian()
    r = g.r[:, None]
    psi = np.sin(math.pi * np.minimum(r, 1.0)) * np.cos(g.phi[None, :] / 2)
    bump = np.exp(-((xy[..., 0] - centre[0]) ** 2 + (xy[..., 1] - centre[1]) ** 2) / width)
    return GridFunction(g, np.where(mask.inside, psi * (bump - level), 0.0), mask)


def test_antisymmetric_u_has_axis_nodal_set():
    m = make_mask(HALF_DISK, 16, 32)
    g = m.grid
    u = GridFunction(g, np.where(m.inside, np.sin(2 * g.phi)[None, :] * g.r[:, None], 0.0), m)
    rep = nodal_sets(u, m)
    cols = np.flatnonzero(rep.zero_cells.any(axis=0))
    assert set(cols) == {15, 16}  # the two columns either side of phi = 0


def test_positive_u_has_no_nodal_set():
    m = make_mask(PACMAN, 12, 24)
    u = GridFunction(m.grid, m.inside * 1.0, m)
    rep = nodal_sets(u, m)
    assert not rep.zero_cells.any() and not rep.minus_cells.any()
    with pytest.raises(NodalError):
        nodal_boundary_distance(rep, boundary_of(m))


def test_zero_u_rejected():
    m = make_mask(PACMAN, 12, 24)
    with pytest.raises(NodalError, match="no sign information"):
        nodal_sets(GridFunction(m.grid, np.zeros(m.grid.shape), m), m)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_partition_matches_brute_force(seed):
    g = build_grid(0, 1.0, 12, 16)
    u = corpus.random_function(np.random.default_rng(seed), g)
    m = u.mask
    rep = nodal_sets(u, m)
    v = u.values
    tau = 1e-6 * np.abs(v[m.inside]).max()
    nr, n = g.shape
    for i in range(nr):
        for j in range(n):
            if not m.inside[i, j]:
                assert not (rep.zero_cells[i, j] or rep.plus_cells[i, j] or rep.minus_cells[i, j])
                continue
            s = 1 if v[i, j] > tau else -1 if v[i, j] < -tau else 0
            nbrs = [(i, (j + 1) % n), (i, (j - 1) % n)] + [(a, j) for a in (i - 1, i + 1) if 0 <= a < nr]
            flips = s != 0 and any(
                m.inside[a, b] and (v[a, b] > tau if s < 0 else v[a, b] < -tau) for a, b in nbrs
            )
            want = "zero" if s == 0 or flips else ("plus" if s > 0 else "minus")
            got = [k for k, a in (("zero", rep.zero_cells), ("plus", rep.plus_cells),
                                  ("minus", rep.minus_cells)) if a[i, j]]
            assert got == [want]


def test_fat_nodal_flag():
    m = make_mask(PACMAN, 12, 24)
    v = np.where(m.inside, 1.0, 0.0)
    v[3:5, 10:12] = 0.0
    v[6, 12] = -1.0
    assert nodal_sets(GridFunction(m.grid, v, m), m).fat_nodal_flag
    v[3:5, 10:12] = 1.0
    assert not nodal_sets(GridFunction(m.grid, v, m), m).fat_nodal_flag


def test_axis_ray_distance_within_h():
    m = make_mask(HALF_DISK, 16, 32)
    g = m.grid
    u = GridFunction(g, np.where(m.inside, np.sin(2 * g.phi)[None, :], 0.0), m)
    assert nodal_boundary_distance(nodal_sets(u, m), boundary_of(m)) <= g.h


def test_interior_band_distance():
    m = make_mask(HALF_DISK, 64, 128)
    g = m.grid
    xy = g.cartesian()
    rho = np.hypot(xy[..., 0] - 0.5, xy[..., 1])
    band = (rho >= 0.1) & (rho <= 0.15)
    u = GridFunction(g, np.where(m.inside & ~band, 1.0, 0.0), m)
    rep = nodal_sets(u, m)
    assert np.array_equal(rep.zero_cells, band & m.inside)
    bnd = boundary_of(m)
    za, zb = g.cartesian(np.argwhere(rep.zero_cells)), g.cartesian(bnd.cells)
    brute = np.sqrt(((za[:, None] - zb[None]) ** 2).sum(-1)).min()
    d = nodal_boundary_distance(rep, bnd)
    assert d == pytest.approx(brute, rel=1e-12)
    # continuous gap: min(0.5 - 0.15 to the diameter, 1 - 0.65 to the arc)
    diag = math.hypot(g.dr, g.r_max * g.dphi)
    assert abs(d - 0.35) <= diag


def test_theta_of_point_half_disk_closed_form():
    m = make_mask(HALF_DISK, 16, 64)
    g = m.grid
    for i, j in m.cells()[::7]:
        want = math.pi / 4 + g.phi[j] / 2
        assert abs(theta_of_point(m, (i, j)) - want) <= g.dphi / 2 + 1e-12
    on_axis = (5, 32)
    assert abs(theta_of_point(m, on_axis) - math.pi / 4) <= g.dphi / 2 + 1e-12
    # next to the ray at phi = -pi/2 the reflection exits at the first lattice step
    j_lo = int(np.flatnonzero(m.inside[5])[0])
    assert theta_of_point(m, (5, j_lo)) == pytest.approx(g.dphi / 2)
    # next to the ray at phi = +pi/2 it has to sweep through the whole domain
    j_hi = int(np.flatnonzero(m.inside[5])[-1])
    assert theta_of_point(m, (5, j_hi)) == pytest.approx(math.pi / 2, abs=g.dphi / 2)


def test_theta_field_matches_scan():
    m = make_mask(TAPERED_SECTOR, 12, 24)
    K = theta_index_field(m)
    for i, j in m.cells():
        assert K[i, j] * m.grid.dphi / 2 == pytest.approx(theta_of_point(m, (i, j)))


def test_theta_of_point_errors():
    m = make_mask(HALF_DISK, 8, 16)
    with pytest.raises(DomainError, match="not inside"):
        theta_of_point(m, (0, 0))


def test_theta_star_interior_arc():
    m = make_mask(HALF_DISK, 32, 64)
    g = m.grid
    u = _interior_nodal_u(m, centre=(0.4, 0.1))
    rep = nodal_sets(u, m)
    th, y, ybnd, rep2 = theta_star(m, rep)
    cand = rep.plus_cells | rep.zero_cells
    phis = g.phi[np.argwhere(cand)[:, 1]]
    closed = math.pi / 4 + phis.min() / 2
    assert abs(th - closed) <= g.dphi / 2 + 1e-12
    assert 0 < th < math.pi
    assert y.any() and not (y & ~rep.zero_cells).any()
    assert not (ybnd & ~y).any()
    assert not rep2.degenerate and not rep2.flipped
    json.dumps(to_jsonable(rep2.to_dict()))


def test_theta_star_flips_sign():
    m = make_mask(HALF_DISK, 32, 64)
    u = _interior_nodal_u(m, centre=(0.4, 0.1))
    th1, *_ = theta_star(m, nodal_sets(u, m))
    th2, _, _, rep = theta_star(m, nodal_sets(-u, m))
    assert th1 == th2 and rep.flipped


def test_theta_star_degenerate_when_touching():
    m = make_mask(HALF_DISK, 32, 64)
    u = _interior_nodal_u(m, centre=(0.78, 0.0), width=0.005)
    rep = nodal_sets(u, m)
    *_, rep2 = theta_star(m, rep)
    assert rep2.degenerate and rep2.dist_to_boundary <= 2 * m.grid.h
    out = moving_polarization_experiment(m, u, EnergyConfig(p=2.0))
    assert out["skipped"]


def test_no_interior_sign_error():
    m = make_mask(HALF_DISK, 16, 32)
    g = m.grid
    u = GridFunction(g, np.where(m.inside, np.sin(2 * g.phi)[None, :], 0.0), m)
    with pytest.raises(NodalError, match="no sign is interior"):
        theta_star(m, nodal_sets(u, m))


def test_second_eigenfunction_touches_boundary(half_disk_24):
    res = solve_second(half_disk_24, EnergyConfig(p=2.0))
    d = nodal_boundary_distance(nodal_sets(res.u, half_disk_24), boundary_of(half_disk_24))
    assert d <= 2 * half_disk_24.grid.h


def test_experiment_skipped_on_symmetric_domain(half_disk_24):
    cfg = EnergyConfig(p=2.0)
    res = solve_second(half_disk_24, cfg)
    out = moving_polarization_experiment(half_disk_24, res.u, cfg, lam=res.lam)
    assert out["skipped"]
    assert "experiment skipped" in out["message"]


@pytest.mark.parametrize("centre", [(0.3, 0.35), (0.45, -0.2), (0.2, 0.5)])
def test_experiment_on_constructed_input(centre):
    m = make_mask(PACMAN, 32, 64)
    u = _interior_nodal_u(m, centre=centre)
    out = moving_polarization_experiment(m, u, EnergyConfig(p=2.0))
    assert not out["skipped"]
    assert out["support_in_domain"] and out["support_in_container"]
    assert out["mass_preserved"]
    assert out["mass"]["u+"] == out["mass"]["w+"] and out["mass"]["u-"] == out["mass"]["w-"]
    assert out["touches_boundary"]
    assert out["theta_polarized"] == pytest.approx(out["theta_star"] - m.grid.dphi / 2)
    assert 0 < out["theta_star"] < math.pi


def test_theta_zero_on_symmetric_input_is_identity():
    m = make_mask(PACMAN, 16, 32)
    g = m.grid
    v = np.where(m.inside, np.cos(3 * g.r[:, None]) * np.cos(g.phi[None, :]), 0.0)
    v = 0.5 * (v + v[:, ::-1])  # bit-exact symmetry about the axis
    u = GridFunction(g, v, m)
    out = moving_polarization_experiment(m, u, EnergyConfig(p=2.0), theta=0.0)
    w = out["w"].values
    assert np.array_equal(w, -v if out["flipped"] else v)
    assert out["mass_preserved"] and out["energy_preserved"]


def test_probe_first_eigenfunction_negative():
    m = make_mask(HALF_DISK, 32, 64)
    res = solve_first(m, EnergyConfig(p=2.0))
    arc = [c for c in boundary_of(m).cells if c[0] == m.grid.n_r]
    probes = normal_derivative_probe(res.u, m, arc)
    assert len(probes) == len(arc)
    assert all(p.estimate < 0 and p.orientation == "radial" for p in probes)
    # closed form j11 J1'(j11) cos(phi) on the arc, up to the eigenfunction scale
    est = np.array([p.estimate for p in probes])
    phis = m.grid.phi[[p.cell[1] for p in probes]]
    away = np.abs(phis) < math.pi / 3  # the corners are under-resolved
    ratio = est[away] / np.cos(phis[away])
    assert ratio.std() / abs(ratio.mean()) < 0.05


def test_probe_zero_function_and_errors():
    m = make_mask(HALF_DISK, 16, 32)
    z = GridFunction(m.grid, np.zeros(m.grid.shape), m)
    cells = boundary_of(m).cells
    assert all(p.estimate == 0 for p in normal_derivative_probe(z, m, cells))
    with pytest.raises(DomainError, match="not a boundary cell"):
        normal_derivative_probe(z, m, [[3, 16]])
    kinds = {p.orientation for p in normal_derivative_probe(z, m, cells)}
    assert kinds == {"radial", "angular"}


def test_probe_second_eigenfunction_flips_across_axis(half_disk_24):
    res = solve_second(half_disk_24, EnergyConfig(p=2.0))
    g = half_disk_24.grid
    arc = [c for c in boundary_of(half_disk_24).cells if c[0] == g.n_r]
    probes = normal_derivative_probe(res.u, half_disk_24, arc)
    upper = [p.estimate for p in probes if g.phi[p.cell[1]] > 0]
    lower = [p.estimate for p in probes if g.phi[p.cell[1]] < 0]
    su, sl = np.sign(upper), np.sign(lower)
    assert len(set(su)) == 1 and len(set(sl)) == 1 and su[0] == -sl[0]


@pytest.mark.parametrize("name", list(PROFILES))
def test_theta_lower_semicontinuous_c2(name):
    m = make_mask(PROFILES[name], 32, 64)
    K = theta_index_field(m).astype(float)
    nr, n = m.grid.shape
    for i, j in m.cells():
        nbrs = [(i, (j + 1) % n), (i, (j - 1) % n)] + [(a, j) for a in (i - 1, i + 1) if 0 <= a < nr]
        vals = [K[a, b] for a, b in nbrs if m.inside[a, b]]
        # theta_x <= min neighbour + 2 dphi, i.e. four half-steps
        assert K[i, j] <= min(vals) + 4
    assert not lsc_violations(m).any()


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_theta_monotone_under_growth(seed):
    g = build_grid(0, 1.0, 12, 24)
    small, large = corpus.nested_profile_pair(np.random.default_rng(seed), g)
    ks, kl = theta_index_field(small), theta_index_field(large)
    assert np.all(ks[small.inside] <= kl[small.inside])
