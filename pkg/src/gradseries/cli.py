"""Command-line interface.

    gradseries compare --config cfg.json [--out report.json] [--format json|csv] [--workers N]
    gradseries sweep   --config cfg.json [...]          (requires a sigma or n sweep list)
    gradseries lemmata [--seed S] [--n N] [--out ...] [--format ...]

Exit codes: 0 when the run completed and every enabled assertion passed,
2 when assertion failures are present in the report, 1 on execution errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import from_file
from .errors import ConfigError, GradSeriesError
from .report import Report
from .runner import run_compare, run_lemma_suite


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default=None,
        help="report format (default: first entry of the config's outputs)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradseries",
        description="SmoothGrad/VarGrad Monte Carlo estimators vs. their analytic series",
    )
    parser.add_argument("--version", action="version", version=f"gradseries {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="run estimators against the series for a config")
    compare.add_argument("--config", required=True, help="experiment config (JSON)")
    compare.add_argument("--workers", type=int, default=1, help="concurrent sweep cells")
    _add_output_options(compare)

    sweep = sub.add_parser("sweep", help="like compare, but requires a sigma or n sweep list")
    sweep.add_argument("--config", required=True, help="experiment config (JSON)")
    sweep.add_argument("--workers", type=int, default=1, help="concurrent sweep cells")
    _add_output_options(sweep)

    lemmata = sub.add_parser("lemmata", help="run the executable lemma suite")
    lemmata.add_argument("--seed", type=int, default=0)
    lemmata.add_argument("--n", type=int, default=1_000_000, help="Monte Carlo samples per moment")
    _add_output_options(lemmata)

    return parser


def _emit(report: Report, fmt: str, out: str | None) -> None:
    text = report.render(fmt)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("compare", "sweep"):
            config = from_file(args.config)
            if args.command == "sweep" and not (config.sigma_swept or config.n_swept):
                raise ConfigError("sweep requires a sigma or n sweep list in the config")
            if args.workers < 1:
                raise ConfigError(f"--workers must be >= 1, got {args.workers}")
            report = run_compare(config, workers=args.workers)
            fmt = args.format or config.outputs[0]
        else:
            report = run_lemma_suite(seed=args.seed, n=args.n)
            fmt = args.format or "json"
        _emit(report, fmt, args.out)
    except GradSeriesError as exc:
        print(f"gradseries: error: {exc}", file=sys.stderr)
        return 1
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
