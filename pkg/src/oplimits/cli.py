"""Command-line entry point.

One binary, one subcommand per experiment.  A JSON config file provides the
base settings; individual flags override it.  Exit status: 0 when every
report row passes, 1 when any row fails, 2 on configuration or runtime
errors.
"""

import argparse
import sys

from .errors import ConfigError
from .harness import (
    EXPERIMENTS,
    ExperimentConfig,
    emit_report,
    load_config_file,
    run_experiment,
)


def _parse_ladder(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oplimits",
        description=(
            "Desk-scale convergence experiments for positive lattice "
            "operators, their iterates, and their diffusion limits."
        ),
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file", default=None)
        p.add_argument("--n-ladder", type=_parse_ladder, default=None,
                       help="comma-separated operator indices, e.g. 8,32,128")
        p.add_argument("--alpha", type=float, default=None,
                       help="weight exponent")
        p.add_argument("--t", type=float, default=None,
                       help="time horizon")
        p.add_argument("--f", dest="function_label", default=None,
                       help="catalog function label")
        p.add_argument("--samples", type=int, default=None,
                       help="Monte Carlo sample count")
        p.add_argument("--seed", type=int, default=None,
                       help="master random seed")
        p.add_argument("--out", dest="output_path", default=None,
                       help="report path (default <experiment>.csv/.json)")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="report format")
    return parser


def _collect_overrides(args) -> dict:
    overrides = {}
    if args.config:
        overrides.update(load_config_file(args.config))
    for key in ("n_ladder", "alpha", "t", "function_label", "samples",
                "seed", "output_path", "format"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.for_experiment(
            args.experiment, _collect_overrides(args)
        )
        report = run_experiment(config)
        out = config.output_path or f"{config.experiment}.{config.format}"
        emit_report(report.rows, out, config.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures also map to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2

    n_pass = sum(1 for r in report.rows if r.passed)
    shown = 0
    for r in report.rows:
        if r.passed and shown >= 40:
            continue  # failures always print; cap the pass-row echo
        shown += 1
        verdict = "pass" if r.passed else "FAIL"
        check = r.params.get("check", "")
        detail = {k: v for k, v in r.params.items() if k not in ("config", "check")}
        bound = "" if r.bound is None else f" bound={r.bound:.6g}"
        print(f"[{verdict}] {r.experiment}/{check} {detail} "
              f"measured={r.measured:.6g}{bound}")
    if shown < len(report.rows):
        print(f"... ({len(report.rows) - shown} more rows in the report)")
    print(f"{n_pass}/{len(report.rows)} rows passed; report written to {out}")
    return 0 if n_pass == len(report.rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
