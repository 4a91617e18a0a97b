import math

import numpy as np
import pytest

from polarlab.grid import RadialProfile, build_grid, mask_from_profile

HALF_DISK = [(1.0, math.pi / 2)]
# beta(r) = pi/2 (1 - r/2), linear so two control points are exact
TAPERED_SECTOR = [(0.001, math.pi / 2 * (1 - 0.0005)), (1.0, math.pi / 4)]
PACMAN = [(1.0, 0.8 * math.pi)]

PROFILES = {"half-disk": HALF_DISK, "sector": TAPERED_SECTOR, "pacman": PACMAN}

# squares of the first zeros of J_1 and J_2
J11_SQ = 14.681970642123893
J21_SQ = 26.374616427163390


def make_mask(points, n_r, n_phi, r_max=1.0, center_a=0.0):
    grid = build_grid(center_a, r_max, n_r, n_phi)
    return mask_from_profile(grid, RadialProfile(points))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def half_disk_24():
    return make_mask(HALF_DISK, 24, 48)


@pytest.fixture
def grid32():
    return build_grid(0.0, 1.0, 32, 32)


ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
