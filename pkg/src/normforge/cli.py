"""``normforge`` command line.

Settings are layered: config file, then ``--set key=value`` pairs, then the
dedicated flags. Exit status is 0 on success, 2 for invalid input and 3 when
the request is well formed but unsupported.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .errors import UnsupportedRequest, ValidationError
from .experiments import (
    FIGURES,
    VARIANTS,
    build_config,
    load_config,
    parse_overrides,
    run_evaluate,
    run_figures,
    run_optimize,
    run_simulate,
    run_stationary,
    run_sweep,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting (repeatable), e.g. --set c=2 --set scheme.L=3")
    p.add_argument("--out", metavar="PATH", help="output file (directory for figures)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--seed", type=int, help="simulation seed")
    p.add_argument("--jobs", type=int, help="worker processes for sweeps (fallback: NORMFORGE_JOBS)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="normforge", description="Evaluate and optimize reputation-based social norms.")
    parser.add_argument("--version", action="version", version=f"normforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evaluate", parents=[common], help="evaluate one norm")
    opt = sub.add_parser("optimize", parents=[common], help="exhaustive norm design")
    opt.add_argument("variant", choices=VARIANTS)
    sub.add_parser("stationary", parents=[common], help="stationary reputation distribution")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo population run")
    sub.add_parser("sweep", parents=[common], help="one exact solve or evaluation per grid point")
    fig = sub.add_parser("figures", parents=[common], help="regenerate figure datasets")
    fig.add_argument("figure", nargs="+", choices=list(FIGURES) + ["all"])
    return parser


def _settings(args) -> dict:
    flat = load_config(args.config) if args.config else {}
    flat.update(parse_overrides(args.overrides))
    if args.format is not None:
        flat["output.format"] = args.format
    if args.out is not None and args.command != "figures":
        flat["output.path"] = args.out
    if args.seed is not None:
        flat["simulation.seed"] = str(args.seed)
    if args.jobs is not None:
        flat["run.jobs"] = str(args.jobs)
    elif os.environ.get("NORMFORGE_JOBS"):
        flat["run.jobs"] = os.environ["NORMFORGE_JOBS"]
    return flat


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def run(args) -> int:
    flat = _settings(args)
    cfg = build_config(flat)
    if args.command == "figures":
        out_dir = args.out or "figures"
        ids = list(FIGURES) if "all" in args.figure else args.figure
        for fid in ids:
            for path in run_figures(fid, flat, out_dir, cfg.format, cfg.jobs):
                print(path)
        return EXIT_OK
    if args.command == "evaluate":
        table = run_evaluate(cfg)
    elif args.command == "optimize":
        table = run_optimize(cfg, args.variant)
    elif args.command == "stationary":
        table = run_stationary(cfg)
    elif args.command == "simulate":
        table = run_simulate(cfg)
    else:
        table = run_sweep(cfg)
    _emit(table.render(cfg.format), cfg.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ValidationError as exc:
        print(f"normforge: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UnsupportedRequest as exc:
        print(f"normforge: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
