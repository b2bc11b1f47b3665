#!/usr/bin/env python3
"""Compare the compiled propagation kernels against the numpy fallback.

Two workloads:

* kernel: long ``propagate_run`` calls at several state dimensions, with and
  without order reduction — this is the hot loop both monitors sit in.
* monitor: a full offline run on a shipped benchmark config, which mixes the
  kernels with LP intersection checks and shows the end-to-end effect.

Usage::

    python3 benchmarks/bench_backends.py [--repeats 5] [--steps 2000]
"""

import argparse
import statistics
import time

import numpy as np

from boundmon import _backend
from boundmon.configs import load_config, shipped_config_path
from boundmon.logs import generate_log, simulate_trace
from boundmon.offline import monitor_offline


def time_call(fn, repeats):
    """Best-of-N wall time; best is the least noisy estimator for short calls."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def kernel_workloads(steps):
    rng = np.random.default_rng(42)
    cases = []
    for n in (2, 4, 8):
        # Mildly contracting center keeps hulls finite over thousands of steps.
        C = rng.uniform(-1.0, 1.0, (n, n))
        C *= 0.95 / max(np.abs(np.linalg.eigvals(C)))
        R = np.full((n, n), 1e-4)
        c0 = rng.uniform(-1.0, 1.0, n)
        G0 = rng.uniform(-0.2, 0.2, (n, 2 * n))
        no_regions = np.zeros((0, n))
        for reduce_at, label in ((4 * n, f"n={n} reduce={4 * n}"), (0, f"n={n} unreduced")):
            # Unreduced runs grow the generator count linearly; cap the length
            # so the numpy backend finishes in reasonable time.
            run_steps = steps if reduce_at else min(steps, 400)
            cases.append(
                (
                    label,
                    run_steps,
                    (
                        np.ascontiguousarray(C),
                        np.ascontiguousarray(R),
                        c0.copy(),
                        np.ascontiguousarray(G0),
                        run_steps,
                        no_regions,
                        no_regions,
                        1e-9,
                        reduce_at,
                    ),
                )
            )
    return cases


def bench_kernels(repeats, steps):
    print("== propagate_run kernel ==")
    header = f"{'case':<20} {'steps':>6} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, run_steps, args in kernel_workloads(steps):
        results = {}
        for name in ("python", "compiled"):
            kernels = _backend.get(name)
            best, _ = time_call(lambda k=kernels: k.propagate_run(*args), repeats)
            results[name] = best
        speedup = results["python"] / results["compiled"]
        print(
            f"{label:<20} {run_steps:>6} {results['python'] * 1e3:>8.2f}ms "
            f"{results['compiled'] * 1e3:>8.2f}ms {speedup:>7.1f}x"
        )
    print()


def bench_monitor(repeats):
    print("== offline monitor, shipped acc config ==")
    config = load_config(shipped_config_path("acc"))
    trace = simulate_trace(
        config.system,
        config.initial,
        config.horizon,
        rng=np.random.default_rng([config.seed, 0]),
        mode=config.trace_mode,
        seed=config.seed,
    )
    log = generate_log(
        trace,
        config.logging.p_log,
        config.logging.t_delta,
        config.logging.sensor_radius,
        rng=np.random.default_rng([config.seed, 1]),
    )
    print(f"log: {len(log)} samples over horizon {log.horizon}")
    results = {}
    for name in ("python", "compiled"):
        with _backend.use(name):
            best, median = time_call(
                lambda: monitor_offline(config.system, log, config.unsafe), repeats
            )
        results[name] = best
        print(f"{name:>9}: best {best * 1e3:8.2f}ms  median {median * 1e3:8.2f}ms")
    print(f"  speedup: {results['python'] / results['compiled']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (default 5)")
    parser.add_argument(
        "--steps", type=int, default=2000, help="kernel run length (default 2000)"
    )
    args = parser.parse_args()
    if "compiled" not in _backend.available_names():
        raise SystemExit("compiled backend unavailable; build it first (pip install -e .)")
    print(f"default backend: {_backend.active_name()}")
    print()
    bench_kernels(args.repeats, args.steps)
    bench_monitor(args.repeats)


if __name__ == "__main__":
    main()
