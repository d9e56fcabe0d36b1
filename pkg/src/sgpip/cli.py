"""Command-line entry points: sweep, trace, and bench.

Config files are flat ``key = value`` text; ``#`` starts a comment, lists are
comma-separated. Every key mirrors an ExperimentConfig field (see the README
key table for defaults). CLI flags override file values.

Exit codes: 0 success, 2 configuration error, 3 numeric failure that aborted
the run.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import ConfigError, NumericError
from .harness import (
    ExperimentConfig,
    GPIP_ALGORITHMS,
    bench_scaling,
    median_wall_times,
    rows_to_csv,
    run_convergence_trace,
    run_experiment,
    trace_rows,
    write_csv,
)

_INT_FIELDS = {"cov_rank", "trials", "seed", "t_max", "n_workers"}
_FLOAT_FIELDS = {
    "kappa", "fc_ghz", "bandwidth_hz", "noise_figure_db", "h_bs_m", "h_ut_m",
    "angular_spread_rad", "shadowing_std_db", "element_spacing", "tol",
}
_BOOL_FIELDS = {"shadowing_enabled", "record_timing"}
_SWEEP_INT_FIELDS = {"n_antennas", "n_users"}
_SWEEP_FLOAT_FIELDS = {"power_dbm"}


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _BOOL_FIELDS:
            return _parse_bool(key, raw)
        if key in _INT_FIELDS:
            return int(raw)
        if key in _FLOAT_FIELDS:
            return float(raw)
        if key in _SWEEP_INT_FIELDS:
            parts = [int(p) for p in raw.split(",") if p.strip()]
            return tuple(parts) if "," in raw else parts[0]
        if key in _SWEEP_FLOAT_FIELDS:
            parts = [float(p) for p in raw.split(",") if p.strip()]
            return tuple(parts) if "," in raw else parts[0]
        if key == "algorithms":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if key == "distance_range_m":
            parts = [float(p) for p in raw.split(",") if p.strip()]
            if len(parts) != 2:
                raise ConfigError(f"distance_range_m: expected two values, got {raw!r}")
            return (parts[0], parts[1])
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from exc
    raise ConfigError(f"unknown configuration key {key!r}")


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat key = value config file into an ExperimentConfig."""
    overrides = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        overrides[key] = _parse_value(key, raw)
    try:
        return ExperimentConfig(**overrides)
    except TypeError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    if getattr(args, "algorithms", None):
        updates["algorithms"] = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    return replace(config, **updates) if updates else config


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    rows = run_experiment(config)
    if args.out:
        write_csv(rows, args.out)
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


def _cmd_trace(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    trace = run_convergence_trace(config, args.algorithm)
    _emit(rows_to_csv(trace_rows(trace, args.algorithm, config.seed)), args.out)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    rows = bench_scaling(config)
    if args.out:
        write_csv(rows, args.out)
    medians = median_wall_times(rows)
    lines = ["algorithm,n_antennas,median_wall_time_ms"]
    for (algorithm, value), ms in sorted(medians.items()):
        lines.append(f"{algorithm},{value:g},{ms:.6f}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgpip",
        description="Precoding benchmark harness: Monte Carlo sweeps, convergence "
        "traces, and scaling benchmarks over seeded channel ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep and emit CSV rows")
    sweep.add_argument("--config", required=True, help="path to a key = value config file")
    sweep.add_argument("--out", help="output CSV path (default: stdout)")
    sweep.add_argument("--seed", type=int, help="override the master seed")
    sweep.add_argument("--trials", type=int, help="override the trial count")
    sweep.add_argument("--algorithms", help="comma-separated algorithm subset override")
    sweep.set_defaults(func=_cmd_sweep)

    trace = sub.add_parser("trace", help="emit one solver's per-iteration objective")
    trace.add_argument("--config", required=True)
    trace.add_argument("--algorithm", required=True, choices=GPIP_ALGORITHMS)
    trace.add_argument("--out", help="output CSV path (default: stdout)")
    trace.add_argument("--seed", type=int, help="override the master seed")
    trace.set_defaults(func=_cmd_trace)

    bench = sub.add_parser("bench", help="timing benchmark over an antenna sweep")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", help="optional CSV path for the raw timed rows")
    bench.add_argument("--seed", type=int, help="override the master seed")
    bench.add_argument("--trials", type=int, help="override the trial count")
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
