"""Trigger-on-demand online safety monitor.

The monitor propagates a reachable-set estimate step by step and asks the
system for a fresh sample only when the propagated set meets an unsafe
region.  A triggered sample either confirms the violation (the sample itself
is unsafe) or resets the estimate, shrinking it back to sensor precision.
With an accurate (zero-radius) logger the verdict matches the ground truth at
every monitored step; with inflated samples it stays sound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from . import _backend
from .dynamics import UncertainLinearSystem
from .geometry import Zonotope, default_epsilon, interval_hull, intersects
from .logs import GroundTruthTrace
from .offline import UnsafeSpec

__all__ = [
    "LoggerError",
    "OnlineReport",
    "SimulatedLogger",
    "TriggerLogger",
    "make_simulated_logger",
    "monitor_online",
    "report_to_dict",
]


class LoggerError(RuntimeError):
    """The trigger logger failed at a step the monitor needed; never silently Safe."""


@runtime_checkable
class TriggerLogger(Protocol):
    """Anything that can produce the current state set on demand."""

    def trigger(self, t: int) -> Zonotope: ...


class SimulatedLogger:
    """Trigger logger backed by a ground-truth trace plus sensor inflation."""

    def __init__(self, trace: GroundTruthTrace, sensor_radius):
        radius = np.asarray(sensor_radius, dtype=float)
        if radius.ndim == 0:
            radius = np.full(trace.dim, float(radius))
        if radius.shape != (trace.dim,):
            raise ValueError(
                f"sensor_radius must be a scalar or length-{trace.dim} vector, "
                f"got shape {radius.shape}"
            )
        if np.any(radius < 0.0) or not np.all(np.isfinite(radius)):
            raise ValueError("sensor_radius must be finite and >= 0")
        self._trace = trace
        self._radius = radius
        self.trigger_count = 0

    def trigger(self, t: int) -> Zonotope:
        if not 0 <= t <= self._trace.horizon:
            raise LoggerError(
                f"trigger at step {t} is outside the trace horizon {self._trace.horizon}"
            )
        self.trigger_count += 1
        return Zonotope(self._trace.states[t], np.diag(self._radius))


def make_simulated_logger(trace: GroundTruthTrace, sensor_radius) -> SimulatedLogger:
    return SimulatedLogger(trace, sensor_radius)


@dataclass
class OnlineReport:
    outcome: str
    unsafe_step: int | None
    triggered_steps: list[int]
    reach_steps: int
    horizon: int
    eps: float
    hulls: dict[int, tuple[np.ndarray, np.ndarray]] | None = None
    trigger_hulls: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def is_safe(self) -> bool:
        return self.outcome == "Safe"

    @property
    def trigger_fraction(self) -> float:
        return len(self.triggered_steps) / (self.horizon + 1)


def _call_trigger(logger: TriggerLogger, t: int, dim: int) -> Zonotope:
    try:
        sample = logger.trigger(t)
    except LoggerError:
        raise
    except Exception as exc:  # noqa: BLE001 - logger internals are opaque
        raise LoggerError(f"trigger logger failed at step {t}: {exc}") from exc
    if not isinstance(sample, Zonotope) or sample.dim != dim:
        raise LoggerError(f"trigger logger returned an invalid sample at step {t}")
    return sample


def monitor_online(
    system: UncertainLinearSystem,
    logger: TriggerLogger,
    unsafe: UnsafeSpec,
    horizon: int,
    eps: float | None = None,
    reduce_order: int = 0,
    collect_hulls: bool = False,
) -> OnlineReport:
    """Monitor steps ``0 .. horizon`` inclusive, sampling only when needed.

    Step 0 always triggers (the monitor has no estimate yet).  Each later
    step propagates the estimate once; if the propagated set meets an unsafe
    region, a fresh sample decides: unsafe sample -> Unsafe at that step,
    safe sample -> the estimate is replaced by the sample and monitoring
    continues.  Completing the loop yields Safe.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if eps is None:
        eps = default_epsilon()
    if unsafe.dim != system.dim:
        raise ValueError(
            f"dimension mismatch: unsafe regions {unsafe.dim} vs system {system.dim}"
        )
    kernels = _backend.active()
    region_hulls = [interval_hull(r) for r in unsafe.regions]
    region_lo = np.array([h.lower for h in region_hulls])
    region_hi = np.array([h.upper for h in region_hulls])

    hulls: dict | None = {} if collect_hulls else None
    trigger_hulls: dict = {}
    triggered: list[int] = []
    reach_steps = 0

    def record(step: int, z_lo, z_hi, into):
        if into is not None:
            into[step] = (np.array(z_lo, dtype=float), np.array(z_hi, dtype=float))

    def sample_at(step: int) -> Zonotope:
        sample = _call_trigger(logger, step, system.dim)
        triggered.append(step)
        h = interval_hull(sample)
        trigger_hulls[step] = (h.lower, h.upper)
        return sample

    def report(outcome, unsafe_step):
        return OnlineReport(
            outcome=outcome,
            unsafe_step=unsafe_step,
            triggered_steps=triggered,
            reach_steps=reach_steps,
            horizon=horizon,
            eps=eps,
            hulls=hulls,
            trigger_hulls=trigger_hulls,
        )

    estimate = sample_at(0)
    if collect_hulls:
        h = interval_hull(estimate)
        record(0, h.lower, h.upper, hulls)
    if any(intersects(estimate, region, eps) for region in unsafe.regions):
        return report("Unsafe", 0)

    c = estimate.center
    G = estimate.generators
    t = 0
    while t < horizon:
        steps, stopped, c, G, lo_hist, hi_hist = kernels.propagate_run(
            system.center,
            system.radius,
            c,
            G,
            horizon - t,
            region_lo,
            region_hi,
            eps,
            reduce_order,
        )
        if collect_hulls:
            for j in range(steps):
                record(t + 1 + j, lo_hist[j], hi_hist[j], hulls)
        reach_steps += steps
        t += steps
        if not stopped:
            break
        propagated = Zonotope(c, G)
        if any(intersects(propagated, region, eps) for region in unsafe.regions):
            sample = sample_at(t)
            if any(intersects(sample, region, eps) for region in unsafe.regions):
                return report("Unsafe", t)
            c = sample.center  # estimate replaced by the fresh sample
            G = sample.generators
    return report("Safe", None)


def report_to_dict(report: OnlineReport) -> dict:
    """JSON-ready form of an online report; deterministic, no wall-clock fields."""
    return {
        "outcome": report.outcome,
        "unsafe_step": report.unsafe_step,
        "triggered_steps": list(report.triggered_steps),
        "stats": {
            "reach_steps": report.reach_steps,
            "triggers": len(report.triggered_steps),
            "trigger_fraction": report.trigger_fraction,
        },
        "eps": report.eps,
        "horizon": report.horizon,
    }
