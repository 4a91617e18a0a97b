"""Configuration-driven experiment runner.

A run sweeps ``p_list x grid_list`` in order, writes one CSV row per
(p, grid) pair plus dumps, rasters and a JSON record.  Non-convergence is
data; only exceptions mark a row as errored.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bessel import sector_eigenvalues
from .grid import DomainError, boundary_of, domain_from_spec, load_domain_spec, load_toml
from .io import export_raster, to_jsonable, write_dump, write_json
from .nodal import NodalError, moving_polarization_experiment, nodal_boundary_distance, nodal_sets, theta_star
from .polarization import is_circularly_symmetric
from .spectral import EnergyConfig, SolverConfig, solve_first, solve_second
from .suite import run_properties

__all__ = [
    "KINDS",
    "OUTPUT_ROOT_ENV",
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "columns_for",
    "run",
    "lemma_suite",
]

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "POLARLAB_OUTPUT_ROOT"

KINDS = (
    "first",
    "second",
    "nodal",
    "moving-polarization",
    "symmetry-check",
    "lemma-suite",
    "refinement-sweep",
)

BASE_COLUMNS = [
    "p", "n_r", "n_phi", "lambda1", "lambda2", "dist_Z_boundary", "theta_star",
    "converged1", "converged2",
]
_EXTRA = {
    "first": ["residual1"],
    "second": ["residual2", "rayleigh_plus", "rayleigh_minus", "distinct_minimizers"],
    "nodal": ["two_h", "within_2h", "fat_nodal", "zero_cells"],
    "moving-polarization": [
        "skipped", "theta_polarized", "support_in_domain", "mass_preserved",
        "energy_preserved", "dist_Zw_boundary", "touches_boundary",
    ],
    "symmetry-check": ["symmetric_i", "symmetric_ii", "symmetric_iii", "agree"],
    "refinement-sweep": ["reference1", "reference2", "error1", "error2"],
}
LEMMA_COLUMNS = ["property", "cases", "checks", "failures", "passed", "witness_n_r", "witness_n_phi"]


def columns_for(kind: str) -> list[str]:
    if kind == "lemma-suite":
        return list(LEMMA_COLUMNS)
    return BASE_COLUMNS + _EXTRA[kind] + ["status", "error"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    domain: dict
    kind: str
    p_list: list[float] = field(default_factory=lambda: [2.0])
    grid_list: list[tuple[int, int]] = field(default_factory=list)
    solver: dict = field(default_factory=dict)
    energy: dict = field(default_factory=dict)
    output_dir: str = "polarlab-out"
    seed: int = 0
    masks: int = 100
    functions: int = 200
    reference: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        dom = data.pop("domain", None)
        if isinstance(dom, str):
            path = Path(dom)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            dom = load_domain_spec(path)
        if not isinstance(dom, dict) and data.get("kind") != "lemma-suite":
            raise ConfigError("config needs a [domain] table or a domain file path")
        known = {"kind", "p", "grids", "solver", "energy", "output_dir", "seed", "lemma", "reference"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        lemma = data.get("lemma", {})
        return cls(
            domain=dom or {},
            kind=data.get("kind", ""),
            p_list=[float(p) for p in data.get("p", [2.0])],
            grid_list=[tuple(int(x) for x in g) for g in data.get("grids", [])],
            solver=dict(data.get("solver", {})),
            energy=dict(data.get("energy", {})),
            output_dir=str(data.get("output_dir", "polarlab-out")),
            seed=int(data.get("seed", 0)),
            masks=int(lemma.get("masks", 100)),
            functions=int(lemma.get("functions", 200)),
            reference=dict(data.get("reference", {})),
        )

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_mapping(load_toml(path), base_dir=path.parent)

    def grids(self) -> list[tuple[int, int]]:
        if self.grid_list:
            return list(self.grid_list)
        if "n_r" in self.domain and "n_phi" in self.domain:
            return [(int(self.domain["n_r"]), int(self.domain["n_phi"]))]
        return []

    def output_path(self) -> Path:
        out = Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            out = Path(root) / out
        return out

    def config_hash(self) -> str:
        """SHA-256 over the canonical semantic content (output location excluded)."""
        sem = {
            "domain": self.domain,
            "kind": self.kind,
            "p": self.p_list,
            "grids": [list(g) for g in self.grids()],
            "solver": asdict(SolverConfig(**self.solver)),
            "energy": self.energy,
            "seed": self.seed,
        }
        if self.kind == "lemma-suite":
            sem["lemma"] = {"masks": self.masks, "functions": self.functions}
        if self.reference:
            sem["reference"] = self.reference
        blob = json.dumps(to_jsonable(sem), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def validate(self) -> None:
        """All checks that can fail before any solve starts."""
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "lemma-suite":
            if self.masks < 1 or self.functions < 1:
                raise ConfigError("lemma corpus sizes must be >= 1")
        else:
            if not self.p_list:
                raise ConfigError("nothing to run: empty p list")
            if not self.grids():
                raise ConfigError("nothing to run: empty grid list")
            for p in self.p_list:
                if not p > 1:
                    raise ConfigError(f"p = {p} must be > 1")
                EnergyConfig(p=p, **self.energy)
            try:
                SolverConfig(**self.solver)
            except TypeError as exc:
                raise ConfigError(f"bad solver table: {exc}") from None
            for n_r, n_phi in self.grids():
                try:
                    domain_from_spec(self.domain, n_r, n_phi)
                except DomainError as exc:
                    raise ConfigError(f"grid {n_r}x{n_phi}: {exc}") from None
        out = self.output_path()
        try:
            out.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(dir=out):
                pass
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc.strerror or exc}") from None


@dataclass
class RunRecord:
    config_hash: str
    kind: str
    columns: list[str]
    rows: list[dict]
    timings: list[float] = field(default_factory=list)
    details: list[dict] = field(default_factory=list)

    @property
    def errored(self) -> bool:
        return any(r.get("status") == "error" for r in self.rows)

    @property
    def failed(self) -> bool:
        if self.kind == "lemma-suite":
            return any(not r["passed"] for r in self.rows)
        return self.errored

    def csv_text(self) -> str:
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({c: _fmt(row.get(c)) for c in self.columns})
        return buf.getvalue()

    def to_dict(self, timings: bool = True) -> dict:
        out = {"config_hash": self.config_hash, "kind": self.kind, "columns": self.columns,
               "rows": self.rows, "details": self.details}
        if timings:
            out["timings_s"] = self.timings
        return to_jsonable(out)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else str(float(x))
    return str(x)


def _sector_reference(domain: dict, p: float):
    """Closed-form lambda1, lambda2 when the domain is a plain sector at p = 2."""
    prof = domain.get("profile", [])
    if p != 2.0 or len(prof) != 1:
        return None
    r, beta = prof[0]
    if abs(float(r) - float(domain["r_max"])) > 1e-12 * float(domain["r_max"]):
        return None
    return sector_eigenvalues(float(beta), float(r), 2)


def _solve_row(cfg: ExperimentConfig, p: float, n_r: int, n_phi: int, outdir: Path) -> tuple[dict, dict]:
    grid, _, mask = domain_from_spec(cfg.domain, n_r, n_phi)
    ecfg = EnergyConfig(p=p, **cfg.energy)
    scfg = SolverConfig(**cfg.solver)
    kind = cfg.kind
    row: dict = {}
    detail: dict = {"p": p, "n_r": n_r, "n_phi": n_phi}
    stem = outdir / "runs" / f"p{p!r}_{n_r}x{n_phi}"

    if kind == "symmetry-check":
        verdicts = {c: is_circularly_symmetric(mask, c) for c in ("i", "ii", "iii")}
        for c, (ok, _) in verdicts.items():
            row[f"symmetric_{c}"] = ok
        row["agree"] = len({ok for ok, _ in verdicts.values()}) == 1
        detail["witnesses"] = {c: w for c, (_, w) in verdicts.items()}
        return row, detail

    stem.mkdir(parents=True, exist_ok=True)
    if kind in ("first", "nodal", "refinement-sweep"):
        r1 = solve_first(mask, ecfg, scfg)
        row.update(lambda1=r1.lam, converged1=r1.converged, residual1=r1.relative_residual)
        detail["first"] = r1.summary()
        write_dump(r1.u, stem / "u1.dump", {"p": p, "lambda": r1.lam, "kind": "first"})
        export_raster(r1.u, stem / "u1.pgm")
    if kind in ("second", "nodal", "moving-polarization", "refinement-sweep"):
        r2 = solve_second(mask, ecfg, scfg)
        row.update(lambda2=r2.lam, converged2=r2.converged, residual2=r2.relative_residual)
        row.update(rayleigh_plus=r2.split_quotients[0], rayleigh_minus=r2.split_quotients[1],
                   distinct_minimizers=len(r2.distinct))
        detail["second"] = r2.summary()
        write_dump(r2.u, stem / "u2.dump", {"p": p, "lambda": r2.lam, "kind": "second"})
        export_raster(r2.u, stem / "u2.pgm")
        rep = nodal_sets(r2.u, mask)
        dist = nodal_boundary_distance(rep, boundary_of(mask))
        rep.dist_to_boundary = dist
        row["dist_Z_boundary"] = dist
        if kind == "nodal":
            try:
                th, _, _, rep = theta_star(mask, rep)
                row["theta_star"] = th
            except NodalError as exc:
                detail["theta_star_note"] = str(exc)
            row.update(two_h=2 * grid.h, within_2h=dist <= 2 * grid.h,
                       fat_nodal=rep.fat_nodal_flag, zero_cells=int(rep.zero_cells.sum()))
            detail["nodal"] = rep.to_dict()
            write_json(rep.to_dict(), stem / "nodal.json")
            export_raster(rep.zero_cells, stem / "nodal.pgm", grid)
            if rep.y_cells is not None:
                export_raster(rep.y_cells, stem / "y_cells.pgm", grid)
        if kind == "moving-polarization":
            exp = moving_polarization_experiment(mask, r2.u, ecfg, lam=r2.lam)
            exp.pop("w", None)
            row.update(skipped=exp["skipped"], theta_star=exp.get("theta_star"),
                       theta_polarized=exp.get("theta_polarized"),
                       support_in_domain=exp.get("support_in_domain"),
                       mass_preserved=exp.get("mass_preserved"),
                       energy_preserved=exp.get("energy_preserved"),
                       dist_Zw_boundary=exp.get("dist_Zw_boundary"),
                       touches_boundary=exp.get("touches_boundary"))
            detail["experiment"] = exp
    if kind == "refinement-sweep":
        ref = None
        if cfg.reference:
            ref = [cfg.reference.get("lambda1"), cfg.reference.get("lambda2")]
        elif (auto := _sector_reference(cfg.domain, p)) is not None:
            ref = auto
        if ref is not None:
            row.update(reference1=ref[0], reference2=ref[1])
            if ref[0] is not None:
                row["error1"] = (row["lambda1"] - ref[0]) / ref[0]
            if ref[1] is not None:
                row["error2"] = (row["lambda2"] - ref[1]) / ref[1]
    return row, detail


def run(cfg: ExperimentConfig) -> RunRecord:
    """Validate, execute and write outputs; see ``columns_for`` for the CSV schema."""
    cfg.validate()
    outdir = cfg.output_path()
    if cfg.kind == "lemma-suite":
        rec = lemma_suite(cfg.seed, cfg.masks, cfg.functions, config_hash=cfg.config_hash())
    else:
        rec = RunRecord(cfg.config_hash(), cfg.kind, columns_for(cfg.kind), [])
        for p in cfg.p_list:
            for n_r, n_phi in cfg.grids():
                base = {"p": p, "n_r": n_r, "n_phi": n_phi}
                t0 = time.perf_counter()
                try:
                    row, detail = _solve_row(cfg, p, n_r, n_phi, outdir)
                    row.update(base, status="ok")
                except Exception as exc:  # one failing run must not stop the sweep
                    log.exception("run p=%s grid=%sx%s failed", p, n_r, n_phi)
                    row, detail = {**base, "status": "error", "error": f"{type(exc).__name__}: {exc}"}, dict(base)
                rec.timings.append(time.perf_counter() - t0)
                rec.rows.append(row)
                rec.details.append(detail)
    (outdir / f"{cfg.kind}.csv").write_text(rec.csv_text())
    write_json(rec.to_dict(), outdir / "record.json")
    return rec


def lemma_suite(
    seed: int = 0,
    masks: int = 100,
    functions: int = 200,
    mutate_reflection: bool = False,
    config_hash: str | None = None,
) -> RunRecord:
    """Property suite over a seeded corpus; failures carry a minimized witness."""
    if masks < 1 or functions < 1:
        raise ValueError("corpus sizes must be >= 1")
    t0 = time.perf_counter()
    results = run_properties(seed, masks, functions, mutate_reflection=mutate_reflection)
    if config_hash is None:
        blob = json.dumps({"kind": "lemma-suite", "seed": seed, "masks": masks, "functions": functions},
                          sort_keys=True)
        config_hash = hashlib.sha256(blob.encode()).hexdigest()
    rows, details = [], []
    for r in results:
        w = r.witness or {}
        rows.append({
            "property": r.name, "cases": r.cases, "checks": r.checks, "failures": r.failures,
            "passed": r.passed, "witness_n_r": w.get("n_r"), "witness_n_phi": w.get("n_phi"),
        })
        details.append(r.row())
    return RunRecord(config_hash, "lemma-suite", list(LEMMA_COLUMNS), rows,
                     [time.perf_counter() - t0], details)
