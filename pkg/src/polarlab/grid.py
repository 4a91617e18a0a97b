"""Polar-grid discretization of circularly symmetric planar domains.

Cells are indexed ``(i, j)`` with centers at ``r_i = (i + 1/2) dr`` and
``phi_j = -pi + (j + 1/2) dphi``.  The grid owns ``n_r`` rings covering
``(0, r_max]`` plus one guard ring just beyond ``r_max``; masks never
reach the guard ring, so every boundary cell is representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

__all__ = [
    "DomainError",
    "PolarGrid",
    "DomainMask",
    "RadialProfile",
    "BoundarySet",
    "build_grid",
    "mask_from_profile",
    "boundary_of",
    "cell_distance",
    "as_cell_mask",
    "load_domain_spec",
    "domain_from_spec",
]


class DomainError(ValueError):
    """Invalid grid, profile or mask."""


@dataclass(frozen=True)
class PolarGrid:
    center_a: float
    r_max: float
    n_r: int
    n_phi: int

    def __post_init__(self):
        if not self.r_max > 0:
            raise DomainError("r_max must be positive")
        if self.n_r < 8:
            raise DomainError("n_r must be at least 8")
        if self.n_phi % 2:
            raise DomainError("n_phi must be even")
        if self.n_phi < 8:
            raise DomainError("n_phi must be at least 8")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_r

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.n_phi

    @property
    def shape(self) -> tuple[int, int]:
        # one guard ring beyond r_max
        return (self.n_r + 1, self.n_phi)

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.n_r + 1) + 0.5) * self.dr

    @property
    def phi(self) -> np.ndarray:
        return -math.pi + (np.arange(self.n_phi) + 0.5) * self.dphi

    @property
    def weights(self) -> np.ndarray:
        """Cell areas ``r_i dr dphi`` broadcast to the grid shape."""
        w = self.r * self.dr * self.dphi
        return np.repeat(w[:, None], self.n_phi, axis=1)

    @property
    def h(self) -> float:
        """Grid spacing scale ``max(dr, r_max dphi)``."""
        return max(self.dr, self.r_max * self.dphi)

    def cartesian(self, cells: np.ndarray | None = None) -> np.ndarray:
        """Cartesian ``(x, y)`` centers, for all cells or an ``(k, 2)`` index array."""
        if cells is None:
            rr, pp = np.meshgrid(self.r, self.phi, indexing="ij")
        else:
            cells = np.asarray(cells, dtype=int).reshape(-1, 2)
            rr = self.r[cells[:, 0]]
            pp = self.phi[cells[:, 1]]
        return np.stack(
            [self.center_a + rr * np.cos(pp), rr * np.sin(pp)], axis=-1
        )

    def descriptor(self) -> dict:
        return {
            "center_a": float(self.center_a),
            "r_max": float(self.r_max),
            "n_r": int(self.n_r),
            "n_phi": int(self.n_phi),
        }


def build_grid(center_a: float, r_max: float, n_r: int, n_phi: int) -> PolarGrid:
    return PolarGrid(float(center_a), float(r_max), int(n_r), int(n_phi))


def _components(inside: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labels with angular wraparound (no adjacency across r = 0)."""
    labels, n = ndimage.label(inside, structure=ndimage.generate_binary_structure(2, 1))
    if n <= 1:
        return labels, n
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    seam = inside[:, 0] & inside[:, -1]
    for a, b in zip(labels[seam, 0], labels[seam, -1]):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(k) for k in range(n + 1)])
    merged = roots[labels]
    uniq = np.unique(merged[inside])
    remap = np.zeros(n + 1, dtype=int)
    remap[uniq] = np.arange(1, len(uniq) + 1)
    return remap[merged] * inside, len(uniq)


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Boolean interior field over a grid; validated on construction."""

    grid: PolarGrid
    inside: np.ndarray = field(repr=False)

    def __post_init__(self):
        inside = np.array(self.inside, dtype=bool)
        if inside.shape != self.grid.shape:
            raise DomainError(
                f"mask shape {inside.shape} does not match grid shape {self.grid.shape}"
            )
        if not inside.any():
            raise DomainError("empty domain")
        if inside[-1].any():
            raise DomainError("mask touches grid edge (outermost ring)")
        labels, n = _components(inside)
        if n > 1:
            first = labels[tuple(np.argwhere(inside)[0])]
            other = np.argwhere((labels != first) & inside)[0]
            raise DomainError(
                f"disconnected domain: {n} components; component containing "
                f"cell ({other[0]}, {other[1]}) is separated"
            )
        inside.setflags(write=False)
        object.__setattr__(self, "inside", inside)

    @property
    def count(self) -> int:
        return int(self.inside.sum())

    def cells(self) -> np.ndarray:
        return np.argwhere(self.inside)

    def area(self) -> float:
        return float(self.grid.weights[self.inside].sum())

    def __eq__(self, other):
        if not isinstance(other, DomainMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.inside, other.inside)

    __hash__ = None


@dataclass(frozen=True)
class RadialProfile:
    """Half-angle function ``beta(r)``, piecewise linear through control points.

    ``beta`` is held constant below the first control point and is zero
    beyond the last one.
    """

    control_points: tuple[tuple[float, float], ...]

    def __init__(self, control_points: Iterable[Sequence[float]]):
        pts = tuple((float(r), float(b)) for r, b in control_points)
        if not pts:
            raise DomainError("profile needs at least one control point")
        rs = [r for r, _ in pts]
        if any(r <= 0 for r in rs):
            raise DomainError("control point radii must be positive")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise DomainError("control point radii must be strictly increasing")
        for r, b in pts:
            if not 0.0 <= b < math.pi:
                raise DomainError(
                    f"beta({r}) = {b} outside [0, pi); a full circle is not allowed"
                )
        betas = [b for _, b in pts]
        pos = [k for k, b in enumerate(betas) if b > 0]
        if pos and any(b == 0 for b in betas[pos[0] : pos[-1] + 1]):
            raise DomainError("profile has a zero band between positive values (disconnected)")
        object.__setattr__(self, "control_points", pts)

    def __call__(self, r) -> np.ndarray:
        rs = np.array([p[0] for p in self.control_points])
        bs = np.array([p[1] for p in self.control_points])
        r = np.asarray(r, dtype=float)
        out = np.interp(r, rs, bs, left=bs[0], right=0.0)
        return np.where(r > rs[-1], 0.0, out)


def mask_from_profile(grid: PolarGrid, profile: RadialProfile) -> DomainMask:
    beta = profile(grid.r)
    inside = np.abs(grid.phi)[None, :] < beta[:, None]
    return DomainMask(grid, inside)


@dataclass(frozen=True, eq=False)
class BoundarySet:
    grid: PolarGrid
    cells: np.ndarray = field(repr=False)

    def as_mask(self) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=bool)
        out[self.cells[:, 0], self.cells[:, 1]] = True
        return out

    def __len__(self):
        return len(self.cells)


def neighbor_any(cells: np.ndarray) -> np.ndarray:
    """Cells with at least one 4-neighbor in ``cells`` (wraparound in j)."""
    out = np.roll(cells, 1, axis=1) | np.roll(cells, -1, axis=1)
    out[1:] |= cells[:-1]
    out[:-1] |= cells[1:]
    return out


def boundary_of(mask: DomainMask) -> BoundarySet:
    inside = mask.inside
    bnd = neighbor_any(inside) & ~inside
    return BoundarySet(mask.grid, np.argwhere(bnd))


def as_cell_mask(grid: PolarGrid, cells) -> np.ndarray:
    """Normalize a cell set (boolean field, ``(k, 2)`` indices, mask or boundary)."""
    if isinstance(cells, DomainMask):
        return cells.inside
    if isinstance(cells, BoundarySet):
        return cells.as_mask()
    arr = np.asarray(cells)
    if arr.dtype == bool and arr.shape == grid.shape:
        return arr
    out = np.zeros(grid.shape, dtype=bool)
    if arr.size:
        arr = arr.astype(int).reshape(-1, 2)
        out[arr[:, 0], arr[:, 1]] = True
    return out


def cell_distance(mask: DomainMask | PolarGrid, cells_a, cells_b) -> float:
    """Minimum Euclidean distance between the centers of two cell sets."""
    grid = mask.grid if isinstance(mask, DomainMask) else mask
    a = np.argwhere(as_cell_mask(grid, cells_a))
    b = np.argwhere(as_cell_mask(grid, cells_b))
    if len(a) == 0 or len(b) == 0:
        raise DomainError("cell_distance needs two nonempty cell sets")
    # query the smaller set against a tree of the larger one
    if len(a) > len(b):
        a, b = b, a
    d, _ = cKDTree(grid.cartesian(b)).query(grid.cartesian(a))
    return float(d.min())


def load_toml(path: str | Path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_domain_spec(path: str | Path) -> dict:
    """Read a TOML domain specification file."""
    return load_toml(path)


def domain_from_spec(spec: dict, n_r: int | None = None, n_phi: int | None = None):
    """Build ``(grid, profile, mask)`` from a domain-spec mapping.

    ``n_r``/``n_phi`` override the values in the mapping (grid sweeps).
    """
    try:
        grid = build_grid(
            spec.get("center_a", 0.0),
            spec["r_max"],
            spec["n_r"] if n_r is None else n_r,
            spec["n_phi"] if n_phi is None else n_phi,
        )
        profile = RadialProfile(spec["profile"])
    except KeyError as exc:
        raise DomainError(f"domain spec missing key {exc.args[0]!r}") from None
    return grid, profile, mask_from_profile(grid, profile)
