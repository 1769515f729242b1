"""Command-line pipeline driver.

Every subcommand reads the experiment config, runs one stage against the
config's output directory, and is idempotent for an unchanged config hash
(finished work is skipped unless --force).  Module errors exit nonzero
with a machine-readable JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import FoldAnnealError
from .pipeline import STAGE_FUNCS
from .records import ExperimentConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foldanneal",
        description="lattice-folding annealing benchmarks, stage by stage",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGE_FUNCS:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--outdir", help="override the config's output directory")
        p.add_argument("--workers", type=int, help="override the config's worker count")
        p.add_argument("--force", action="store_true",
                       help="recompute this stage even if records exist")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.outdir:
            cfg.outdir = args.outdir
        if args.workers:
            cfg.workers = args.workers
        result = STAGE_FUNCS[args.command](cfg, force=args.force)
    except (FoldAnnealError, FileNotFoundError, ValueError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err), file=sys.stderr)
        return 1
    if isinstance(result, str):
        print(result)
    else:
        print(f"{args.command}: {result} new record(s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
