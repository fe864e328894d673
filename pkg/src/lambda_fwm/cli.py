"""Command-line front end: ``lambda-fwm {run,figure,sweep,validate,optimal-z}``.

Exit codes: 0 success, 2 configuration error, 3 solver or regime error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .analytic import optimal_distance
from .config import FORMATS, SOLVERS, RunConfig, SweepSpec, config_from_dict, load_json, sweep_from_dict
from .datasets import figure, run, run_sweep, write_dataset
from .errors import ConfigError, FWMError
from .model import WeakProbeWarning
from .presets import FIGURES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4

log = logging.getLogger("lambda_fwm")


def _solvers_arg(text: str) -> tuple:
    solvers = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in solvers if s not in SOLVERS]
    if bad:
        raise ConfigError(f"unknown solver(s) {bad}; choose from {list(SOLVERS)}", "--solvers")
    if not solvers:
        raise ConfigError("at least one solver must be selected", "solvers")
    return solvers


def _load_run_config(args) -> RunConfig:
    data = load_json(args.config)
    data.pop("sweep", None)
    if args.solvers is not None:
        data["solvers"] = list(_solvers_arg(args.solvers))
    return config_from_dict(data)


def _output_format(args, cfg_format: str = "csv") -> str:
    return args.format or cfg_format


def cmd_run(args) -> int:
    cfg = _load_run_config(args)
    fmt = _output_format(args, cfg.output_format)
    ds = run(cfg, stamp=args.stamp)
    if args.out:
        target = Path(args.out) / f"run.{fmt}"
    elif cfg.output_path:
        target = Path(cfg.output_path)
    else:
        target = Path(f"run.{fmt}")
    write_dataset(ds, target, fmt)
    print(json.dumps({"output": str(target), "z_over_c_tau": ds.metadata["z_over_c_tau"], "peaks": ds.metadata["peaks"]}, sort_keys=True))
    return EXIT_OK


def cmd_figure(args) -> int:
    fmt = args.format or "csv"
    out = Path(args.out or ".")
    traces, peaks = figure(args.id, stamp=args.stamp)
    p1 = write_dataset(traces, out / f"{args.id}.{fmt}", fmt)
    p2 = write_dataset(peaks, out / f"{args.id}_peaks.{fmt}", fmt)
    summary = [
        {k: peaks.columns[k][i] for k in ("value", "variant", "z_over_c_tau", "solver", "peak_efficiency")}
        for i in range(len(peaks.columns["solver"]))
    ]
    for row in summary:
        if row["value"] != row["value"]:  # NaN for single-curve figures
            row["value"] = None
    print(json.dumps({"outputs": [str(p1), str(p2)], "peaks": summary}, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = load_json(args.config)
    if args.parameter or args.values:
        if not (args.parameter and args.values):
            raise ConfigError("--parameter and --values must be given together", "sweep")
        try:
            values = [float(v) for v in args.values.split(",")]
        except ValueError as exc:
            raise ConfigError(f"values must be numbers: {args.values!r}", "sweep.values") from exc
        data["sweep"] = {"parameter": args.parameter, "values": values}
    if args.solvers is not None:
        data["solvers"] = list(_solvers_arg(args.solvers))
    spec: SweepSpec = sweep_from_dict(data)
    fmt = _output_format(args, spec.base.output_format)
    index = run_sweep(spec, args.out or "sweep", fmt, stamp=args.stamp)
    print(json.dumps({"index": str(index), "points": len(spec.values)}))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_suite

    results = run_suite(include_oracle=not args.skip_oracle)
    for r in results:
        print(json.dumps(r.as_dict(), sort_keys=True))
    failed = [r.name for r in results if not r.passed]
    print(json.dumps({"summary": {"passed": len(results) - len(failed), "failed": failed}}, sort_keys=True))
    return EXIT_OK if not failed else EXIT_VALIDATION


def cmd_optimal_z(args) -> int:
    if args.config:
        cfg = _load_run_config(args)
        medium, c_tau_cm = cfg.medium, cfg.c_tau_cm
    elif args.figure:
        medium, c_tau_cm = FIGURES[args.figure]["base"], 1.0
    else:
        raise ConfigError("give --config or --figure", "--config")
    z = optimal_distance(medium)
    print(json.dumps({"z_over_c_tau": z, "z_cm": z * c_tau_cm}, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambda-fwm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=FORMATS, help="csv (default) or json")
        p.add_argument("--solvers", help="comma-separated subset of analytic,spectral,oracle")
        p.add_argument("--stamp", action="store_true", help="record a creation timestamp in the metadata")

    p = sub.add_parser("run", help="single run of the selected solvers")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("figure", help="reproduce a published figure dataset")
    p.add_argument("id", choices=sorted(FIGURES))
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--stamp", action="store_true")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", help="parameter sweep; one file per point plus an index")
    common(p)
    p.add_argument("--parameter", choices=["delta2", "delta3", "rabi_ratio_sq"])
    p.add_argument("--values", help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--skip-oracle", action="store_true", help="omit the slow time-domain cross-checks")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("optimal-z", help="distance of maximal conversion")
    p.add_argument("--config")
    p.add_argument("--figure", choices=sorted(FIGURES))
    p.add_argument("--solvers", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_optimal_z)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default", WeakProbeWarning)
            return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FWMError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
