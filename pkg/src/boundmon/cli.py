"""Command-line interface.

Subcommands::

    boundmon genlog  --config cfg.json --out log.json [--out-trace trace.json]
    boundmon offline --config cfg.json --log log.json [--out verdict.json] [--out-csv run.csv]
    boundmon online  --config cfg.json --trace trace.json [--out report.json] [--out-csv run.csv]
    boundmon plot    --csv run.csv --dim 0 --out plot.svg

Exit codes: 0 = Safe (or success for genlog/plot), 1 = Unsafe, 2 = error.
All outputs are deterministic functions of the input files and flags; wall
clock timings go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import _backend
from .configs import ConfigError, ModelConfig, load_config
from .geometry import GeometrySolverError, interval_hull
from .logs import (
    LogFormatError,
    UncertainLog,
    generate_log,
    read_log,
    read_trace,
    simulate_trace,
    write_log,
    write_trace,
)
from .offline import UnsafeSpec, monitor_offline, verdict_to_dict
from .online import LoggerError, make_simulated_logger, monitor_online, report_to_dict
from .plotting import CSV_HEADER, CsvFormatError, read_rows, render_svg

__all__ = ["main"]

EXIT_SAFE = 0
EXIT_UNSAFE = 1
EXIT_ERROR = 2

_USER_ERRORS = (
    ConfigError,
    CsvFormatError,
    GeometrySolverError,
    LoggerError,
    LogFormatError,
    OSError,
    ValueError,
)


def _write_json(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _hull_rows(kind: str, hulls: dict) -> list[tuple]:
    rows = []
    for step in sorted(hulls):
        lo, hi = hulls[step]
        for d in range(lo.shape[0]):
            rows.append((kind, step, step, d, float(lo[d]), float(hi[d])))
    return rows


def _sample_rows(log: UncertainLog) -> list[tuple]:
    rows = []
    for sample in log.samples:
        hull = interval_hull(sample.set)
        for d in range(log.dim):
            rows.append(
                ("sample", sample.t_lb, sample.t_ub, d, float(hull.lower[d]), float(hull.upper[d]))
            )
    return rows


def _unsafe_rows(unsafe: UnsafeSpec, horizon: int) -> list[tuple]:
    rows = []
    for region in unsafe.regions:
        hull = interval_hull(region)
        for d in range(unsafe.dim):
            rows.append(
                ("unsafe", 0, horizon, d, float(hull.lower[d]), float(hull.upper[d]))
            )
    return rows


def _write_csv(rows: list[tuple], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _parse_sensor_radius(raw: str, dim: int) -> np.ndarray:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"--sensor-radius must be comma-separated floats, got {raw!r}")
    if len(values) == 1:
        values = values * dim
    if len(values) != dim:
        raise ValueError(
            f"--sensor-radius needs 1 or {dim} values, got {len(values)}"
        )
    return np.asarray(values)


def _genlog_settings(config: ModelConfig, args) -> tuple[int, float, int, np.ndarray]:
    seed = config.seed if args.seed is None else args.seed
    p_log = config.logging.p_log if args.p_log is None else args.p_log
    if not 0.0 <= p_log <= 1.0:
        raise ValueError(f"--p-log must be in [0, 1], got {p_log}")
    t_delta = config.logging.t_delta if args.t_delta is None else args.t_delta
    if t_delta < 0:
        raise ValueError(f"--t-delta must be >= 0, got {t_delta}")
    if args.sensor_radius is None:
        radius = config.logging.sensor_radius
    else:
        radius = _parse_sensor_radius(args.sensor_radius, config.dim)
    return seed, p_log, t_delta, radius


def _cmd_genlog(args) -> int:
    config = load_config(args.config)
    seed, p_log, t_delta, radius = _genlog_settings(config, args)
    trace = simulate_trace(
        config.system,
        config.initial,
        config.horizon,
        rng=np.random.default_rng([seed, 0]),
        mode=config.trace_mode,
        seed=seed,
    )
    log = generate_log(trace, p_log, t_delta, radius, rng=np.random.default_rng([seed, 1]))
    write_log(log, args.out)
    if args.out_trace:
        write_trace(trace, args.out_trace)
    print(f"wrote {len(log)} samples over horizon {log.horizon} to {args.out}")
    return EXIT_SAFE


def _cmd_offline(args) -> int:
    config = load_config(args.config)
    log = read_log(args.log)
    if log.dim != config.dim:
        raise ValueError(
            f"log dimension {log.dim} does not match config dimension {config.dim}"
        )
    verdict = monitor_offline(
        config.system,
        log,
        config.unsafe,
        workers=args.workers,
        reduce_order=args.reduce_order,
        collect_hulls=args.out_csv is not None,
    )
    if args.out:
        _write_json(verdict_to_dict(verdict), args.out)
    if args.out_csv:
        rows = _hull_rows("reach", verdict.hulls)
        rows += _sample_rows(log)
        rows += _unsafe_rows(config.unsafe, log.horizon)
        _write_csv(rows, args.out_csv)
    print(verdict.outcome)
    return EXIT_SAFE if verdict.is_safe else EXIT_UNSAFE


def _cmd_online(args) -> int:
    config = load_config(args.config)
    trace = read_trace(args.trace)
    if trace.dim != config.dim:
        raise ValueError(
            f"trace dimension {trace.dim} does not match config dimension {config.dim}"
        )
    if trace.horizon < config.horizon:
        raise ValueError(
            f"trace horizon {trace.horizon} is shorter than config horizon {config.horizon}"
        )
    logger = make_simulated_logger(trace, config.logging.sensor_radius)
    report = monitor_online(
        config.system,
        logger,
        config.unsafe,
        config.horizon,
        reduce_order=args.reduce_order,
        collect_hulls=args.out_csv is not None,
    )
    if args.out:
        _write_json(report_to_dict(report), args.out)
    if args.out_csv:
        rows = _hull_rows("reach", report.hulls)
        rows += _hull_rows("trigger", report.trigger_hulls)
        rows += _unsafe_rows(config.unsafe, config.horizon)
        _write_csv(rows, args.out_csv)
    print(report.outcome)
    return EXIT_SAFE if report.is_safe else EXIT_UNSAFE


def _cmd_plot(args) -> int:
    rows = read_rows(args.csv)
    svg = render_svg(rows, dim=args.dim, title=args.title, axis_label=args.axis_label)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return EXIT_SAFE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundmon",
        description=(
            "Reachability-based safety monitoring of logged or live systems "
            "bounded by uncertain linear dynamics."
        ),
    )
    parser.add_argument(
        "--backend-info",
        action="store_true",
        help="print the active kernel backend and exit",
    )
    sub = parser.add_subparsers(dest="command")

    genlog = sub.add_parser("genlog", help="simulate a trace and emit an uncertain log")
    genlog.add_argument("--config", required=True, help="model config JSON")
    genlog.add_argument("--out", required=True, help="output log JSON")
    genlog.add_argument("--out-trace", help="also write the ground-truth trace JSON")
    genlog.add_argument("--seed", type=int, help="override the config seed")
    genlog.add_argument("--p-log", type=float, help="override the logging probability")
    genlog.add_argument("--t-delta", type=int, help="override the max timestamp delay")
    genlog.add_argument(
        "--sensor-radius",
        help="override sensor half-widths (single float or comma-separated per dim)",
    )
    genlog.set_defaults(func=_cmd_genlog)

    offline = sub.add_parser("offline", help="monitor a recorded uncertain log")
    offline.add_argument("--config", required=True, help="model config JSON")
    offline.add_argument("--log", required=True, help="uncertain log JSON")
    offline.add_argument("--out", help="write the verdict JSON here")
    offline.add_argument("--out-csv", help="write reach/sample/unsafe hull rows here")
    offline.add_argument(
        "--workers", type=int, default=1, help="pair-evaluation threads (default 1)"
    )
    offline.add_argument(
        "--reduce-order",
        type=int,
        default=0,
        help="coarsen to the interval hull beyond this many generators (0 = never)",
    )
    offline.set_defaults(func=_cmd_offline)

    online = sub.add_parser("online", help="monitor a trace with on-demand sampling")
    online.add_argument("--config", required=True, help="model config JSON")
    online.add_argument("--trace", required=True, help="ground-truth trace JSON")
    online.add_argument("--out", help="write the report JSON here")
    online.add_argument("--out-csv", help="write reach/trigger/unsafe hull rows here")
    online.add_argument(
        "--reduce-order",
        type=int,
        default=0,
        help="coarsen to the interval hull beyond this many generators (0 = never)",
    )
    online.set_defaults(func=_cmd_online)

    plot = sub.add_parser("plot", help="render a monitoring CSV as an SVG")
    plot.add_argument("--csv", required=True, help="CSV produced by offline/online")
    plot.add_argument("--dim", type=int, required=True, help="state dimension to plot")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("--title", default="", help="plot title")
    plot.add_argument("--axis-label", default="", help="y-axis label")
    plot.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.backend_info:
        print(f"active kernel backend: {_backend.active_name()}")
        print(f"available backends: {', '.join(_backend.available_names())}")
        return EXIT_SAFE
    if args.command is None:
        parser.print_help()
        return EXIT_ERROR
    started = time.perf_counter()
    try:
        code = args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(
        f"{args.command} completed in {time.perf_counter() - started:.3f}s",
        file=sys.stderr,
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
