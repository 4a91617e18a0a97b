"""File formats: PGM rasters, raw function dumps and JSON reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grid import BoundarySet, DomainMask, PolarGrid, as_cell_mask, build_grid
from .polarization import GridFunction

__all__ = ["export_raster", "write_dump", "read_dump", "to_jsonable", "write_json"]

DUMP_MAGIC = b"POLARLAB-DUMP 1\n"


def _raster_bytes(field, grid: PolarGrid | None):
    if isinstance(field, GridFunction):
        return field.grid, np.asarray(field.values, dtype=float), False
    if isinstance(field, (DomainMask, BoundarySet)):
        return field.grid, as_cell_mask(field.grid, field).astype(float), True
    arr = np.asarray(field)
    if grid is None:
        raise ValueError("grid required for raw arrays")
    if arr.dtype == bool or (arr.ndim == 2 and arr.shape[-1:] == (2,) and arr.dtype.kind == "i"):
        return grid, as_cell_mask(grid, arr).astype(float), True
    return grid, arr.astype(float), False


def export_raster(field, path, grid: PolarGrid | None = None) -> Path:
    """Write a binary PGM (P5): rows are rings ``i``, columns angular index ``j``.

    Values map affinely from ``[min, max]`` onto ``[0, 255]``; a constant field
    maps to 128.  Cell sets export as 0/255.
    """
    grid, v, is_set = _raster_bytes(field, grid)
    if v.shape != grid.shape:
        raise ValueError(f"field shape {v.shape} != grid shape {grid.shape}")
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        scale = 255.0 / (hi - lo)
        data = np.rint((v - lo) * scale).astype(np.uint8)
    else:
        scale = 0.0
        data = np.full(v.shape, 128, dtype=np.uint8)
    d = grid.descriptor()
    header = (
        "P5\n"
        f"# grid center_a={d['center_a']!r} r_max={d['r_max']!r} n_r={d['n_r']} n_phi={d['n_phi']} "
        f"rows=i cols=j\n"
        f"# map byte=round((value-{lo!r})*{scale!r}) min={lo!r} max={hi!r}"
        f"{' set' if is_set else ''}\n"
        f"{v.shape[1]} {v.shape[0]}\n255\n"
    ).encode("ascii")
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(data).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write raster {path}: {exc.strerror or exc}") from exc
    return path


def read_pgm(path) -> tuple[dict, np.ndarray]:
    """Read back a raster written by :func:`export_raster` (comments and bytes)."""
    raw = Path(path).read_bytes()
    lines, pos = [], 0
    while len([ln for ln in lines if not ln.startswith("#")]) < 3:
        end = raw.index(b"\n", pos)
        lines.append(raw[pos:end].decode("ascii"))
        pos = end + 1
    plain = [ln for ln in lines if not ln.startswith("#")]
    if plain[0] != "P5":
        raise ValueError(f"{path}: not a P5 raster")
    w, h = map(int, plain[1].split())
    data = np.frombuffer(raw[pos:], dtype=np.uint8).reshape(h, w)
    return {"comments": [ln[2:] for ln in lines if ln.startswith("#")]}, data


def write_dump(u: GridFunction, path, meta: dict | None = None) -> Path:
    """Raw dump: magic line, one JSON header line, float64 LE values, then an optional uint8 mask."""
    header = {
        "grid": u.grid.descriptor(),
        "dtype": "<f8",
        "shape": list(u.grid.shape),
        "order": "row-major (i outer, j inner)",
        "has_mask": u.mask is not None,
        "meta": to_jsonable(meta or {}),
    }
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(DUMP_MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())
            if u.mask is not None:
                fh.write(u.mask.inside.astype(np.uint8).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write dump {path}: {exc.strerror or exc}") from exc
    return path


def read_dump(path) -> tuple[GridFunction, dict]:
    path = Path(path)
    raw = path.read_bytes()
    if not raw.startswith(DUMP_MAGIC):
        raise ValueError(f"{path}: not a function dump")
    end = raw.index(b"\n", len(DUMP_MAGIC))
    header = json.loads(raw[len(DUMP_MAGIC) : end])
    grid = build_grid(**header["grid"])
    n = grid.shape[0] * grid.shape[1]
    body = raw[end + 1 :]
    values = np.frombuffer(body[: 8 * n], dtype="<f8").reshape(grid.shape).copy()
    mask = None
    if header.get("has_mask"):
        inside = np.frombuffer(body[8 * n : 9 * n], dtype=np.uint8).reshape(grid.shape).astype(bool)
        mask = DomainMask(grid, inside)
    return GridFunction(grid, values, mask), header


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
