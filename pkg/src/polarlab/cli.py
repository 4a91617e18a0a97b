"""Command-line entry point: ``polarlab run | lemma-suite | export``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .io import export_raster, read_dump, write_json
from .lab import ConfigError, ExperimentConfig, lemma_suite, run

log = logging.getLogger("polarlab")


def _cmd_run(args) -> int:
    try:
        cfg = ExperimentConfig.from_toml(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load config {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        rec = run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = cfg.output_path()
    print(f"wrote {out / (cfg.kind + '.csv')} ({len(rec.rows)} rows)")
    sys.stdout.write(rec.csv_text())
    return 1 if rec.failed else 0


def _cmd_lemma(args) -> int:
    rec = lemma_suite(args.seed, args.masks, args.functions)
    sys.stdout.write(rec.csv_text())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "lemma-suite.csv").write_text(rec.csv_text())
        write_json(rec.to_dict(), out / "record.json")
    for d in rec.details:
        if d["witness"]:
            print(f"witness {d['property']}: {json.dumps(d['witness'], default=str)}", file=sys.stderr)
    return 1 if rec.failed else 0


def _cmd_export(args) -> int:
    try:
        u, _ = read_dump(args.dump)
        export_raster(u, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarlab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config (TOML)")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("lemma-suite", help="seeded polarization property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--masks", type=int, default=100)
    p.add_argument("--functions", type=int, default=200)
    p.add_argument("--out", help="directory for CSV and JSON record")
    p.set_defaults(func=_cmd_lemma)

    p = sub.add_parser("export", help="convert a function dump to a PGM raster")
    p.add_argument("dump")
    p.add_argument("out")
    p.set_defaults(func=_cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "masks", 1) < 1 or getattr(args, "functions", 1) < 1:
        print("error: corpus sizes must be >= 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
