"""Command-line entry point.

``parafair run <config>`` executes a configured experiment, ``validate``
checks a config without training, and ``embed`` delay-embeds a previously
exported curves CSV. Progress goes to stderr; stdout carries only the
final table. Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .analysis import export_takens, read_curves_csv
from .config import read_config_file
from .exceptions import ConfigError, InvalidInputError, ParafairError
from .experiment import run_experiment

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parafair",
        description="Train and compare rating predictors on accuracy (MAE) and "
        "popularity-concentration fairness (degree of Matthew effect).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configured experiment")
    run_p.add_argument("config", type=Path, help="experiment config file")
    run_p.add_argument("--out", type=Path, default=None, help="override the output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the experiment seed")

    val_p = sub.add_parser("validate", help="validate a config file without training")
    val_p.add_argument("config", type=Path)

    emb_p = sub.add_parser("embed", help="delay-embed an exported curves CSV")
    emb_p.add_argument("curves", type=Path, help="curves.csv produced by a run")
    emb_p.add_argument("--delay", type=int, default=1, help="embedding delay (default 1)")
    emb_p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: beside the input)")
    emb_p.add_argument("--no-figures", action="store_true", help="skip image rendering")
    return parser


def _cmd_run(args) -> int:
    config = read_config_file(args.config, seed_override=args.seed, output_override=args.out)
    run_experiment(config)
    return 0


def _cmd_validate(args) -> int:
    config = read_config_file(args.config)
    print(f"OK: {len(config.models)} model(s) configured: {', '.join(config.models)}")
    return 0


def _cmd_embed(args) -> int:
    traces = read_curves_csv(args.curves)
    out = args.out if args.out is not None else args.curves.parent
    paths, rows = export_takens(traces, out, delay=args.delay)
    if not args.no_figures:
        from . import plotting

        plotting.save_takens_figures(traces, out, delay=args.delay)
    for metric, path in paths.items():
        logger.info("wrote %s (%d rows)", path, rows[metric])
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_embed(args)
    except (ConfigError, InvalidInputError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ParafairError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
