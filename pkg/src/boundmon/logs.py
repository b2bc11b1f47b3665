"""Uncertain logs: the data model, trajectory simulation, and JSON round-trip.

A log is a sparse sequence of *samples*: sensor-inflated state sets tagged
with integer timestamp intervals.  Consecutive intervals are disjoint, so the
order of events is never ambiguous even though exact timing may be.  The
ground-truth trace that produced a log is kept as a separate artifact — the
monitors never see it, the tests use it as the oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dynamics import UncertainLinearSystem, sample_member
from .geometry import Zonotope, contains_point

__all__ = [
    "GroundTruthTrace",
    "LogFormatError",
    "Sample",
    "UncertainLog",
    "generate_log",
    "read_log",
    "read_trace",
    "simulate_trace",
    "write_log",
    "write_trace",
]

TRACE_MODES = ("per-step", "fixed")


class LogFormatError(ValueError):
    """A log or trace file (or in-memory log) violates the format contract."""


@dataclass(frozen=True)
class Sample:
    """One logged observation: a state set and the timestamp interval it may belong to."""

    set: Zonotope
    t_lb: int
    t_ub: int

    def __post_init__(self):
        for name in ("t_lb", "t_ub"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                raise LogFormatError(f"sample timestamps must be integers, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.t_lb < 0 or self.t_lb > self.t_ub:
            raise LogFormatError(
                f"sample timestamp interval [{self.t_lb}, {self.t_ub}] is invalid"
            )


class UncertainLog:
    """Ordered, timestamp-disjoint samples over a monitoring horizon."""

    __slots__ = ("samples", "horizon", "dim")

    def __init__(self, samples, horizon: int):
        samples = tuple(samples)
        if not samples:
            raise LogFormatError("a log must contain at least one sample")
        if horizon < 0:
            raise LogFormatError(f"horizon must be >= 0, got {horizon}")
        dim = samples[0].set.dim
        for i, s in enumerate(samples):
            if not isinstance(s, Sample):
                raise LogFormatError(f"sample {i}: expected a Sample instance")
            if s.set.dim != dim:
                raise LogFormatError(
                    f"sample {i}: dimension {s.set.dim} differs from sample 0 ({dim})"
                )
            if s.t_ub > horizon:
                raise LogFormatError(
                    f"sample {i}: t_ub {s.t_ub} exceeds the horizon {horizon}"
                )
            if i > 0 and samples[i - 1].t_ub >= s.t_lb:
                raise LogFormatError(
                    f"sample {i}: interval [{s.t_lb}, {s.t_ub}] overlaps the previous "
                    f"interval [{samples[i - 1].t_lb}, {samples[i - 1].t_ub}]"
                )
        self.samples = samples
        self.horizon = int(horizon)
        self.dim = dim

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


@dataclass(frozen=True)
class GroundTruthTrace:
    """Concrete trajectory ``x_0 .. x_H`` realized by one member of the system."""

    states: np.ndarray
    seed: int | None
    mode: str

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError(f"states must be a (H+1, n) array, got shape {states.shape}")
        if not np.all(np.isfinite(states)):
            raise ValueError("trace states must be finite")
        if self.mode not in TRACE_MODES:
            raise ValueError(f"mode must be one of {TRACE_MODES}, got {self.mode!r}")
        object.__setattr__(self, "states", states)

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def simulate_trace(
    system: UncertainLinearSystem,
    initial: Zonotope,
    horizon: int,
    rng,
    mode: str = "per-step",
    seed: int | None = None,
) -> GroundTruthTrace:
    """Simulate one trajectory of a member realization of the system.

    ``mode="fixed"`` draws a single member matrix for the whole run;
    ``mode="per-step"`` redraws it every step.  The initial state is a uniform
    point of ``initial``.  ``seed`` is recorded on the trace for provenance
    only — pass the same value used to build ``rng`` (or let the public CLI do
    this bookkeeping).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if mode not in TRACE_MODES:
        raise ValueError(f"mode must be one of {TRACE_MODES}, got {mode!r}")
    if initial.dim != system.dim:
        raise ValueError(
            f"dimension mismatch: initial set {initial.dim} vs system {system.dim}"
        )
    rng = _as_rng(rng)
    coeffs = rng.uniform(-1.0, 1.0, size=initial.num_generators)
    x = initial.center + initial.generators @ coeffs
    states = np.empty((horizon + 1, system.dim))
    states[0] = x
    A = sample_member(system, rng) if mode == "fixed" else None
    for t in range(horizon):
        step_matrix = A if A is not None else sample_member(system, rng)
        states[t + 1] = step_matrix @ states[t]
    return GroundTruthTrace(states=states, seed=seed, mode=mode)


def generate_log(
    trace: GroundTruthTrace,
    p_log: float,
    t_delta: int,
    sensor_radius,
    rng,
) -> UncertainLog:
    """Turn a trace into an uncertain log by probabilistic, noisy sampling.

    Step 0 is always logged; every later step is logged independently with
    probability ``p_log``.  A logged step ``t`` yields the axis-aligned box
    centered at the true state with half-widths ``sensor_radius`` and the
    timestamp interval ``[t, min(horizon, t + w)]``.

    The delay ``w`` is ``floor(u * (t_delta + 1))`` with one uniform draw
    ``u`` per logged step, so for a fixed seed the intervals widen pointwise
    as ``t_delta`` grows.  A candidate whose interval would overlap the
    previously accepted one is discarded.  Draw order per step is fixed
    (logging coin first, then the delay draw for logged steps only), making
    the result reproducible from the seed alone.

    With ``sensor_radius = 0`` and ``t_delta = 0`` the log records the true
    states as point sets with exact timestamps.
    """
    if not 0.0 <= p_log <= 1.0:
        raise ValueError(f"p_log must be in [0, 1], got {p_log}")
    if t_delta < 0:
        raise ValueError(f"t_delta must be >= 0, got {t_delta}")
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
    rng = _as_rng(rng)
    horizon = trace.horizon
    samples: list[Sample] = []

    def add_candidate(t: int) -> None:
        w = int(rng.random() * (t_delta + 1))
        t_ub = min(horizon, t + w)
        if samples and samples[-1].t_ub >= t:
            return  # would overlap the previous interval: discard
        box = Zonotope(trace.states[t], np.diag(radius))
        samples.append(Sample(set=box, t_lb=t, t_ub=t_ub))

    add_candidate(0)
    for t in range(1, horizon + 1):
        if rng.random() < p_log:
            add_candidate(t)
    log = UncertainLog(samples, horizon)
    assert all(
        contains_point(s.set, trace.states[s.t_lb], eps=0.0) for s in log.samples
    ), "generated samples must contain the true state they measure"
    return log


# --- JSON round-trip -------------------------------------------------------
#
# Numbers are written in Python's shortest round-trip decimal form, which
# parses back to the identical float64 bit pattern; files are byte-stable
# across repeated runs with the same inputs.


def _log_to_dict(log: UncertainLog) -> dict:
    return {
        "horizon": log.horizon,
        "dim": log.dim,
        "samples": [
            {
                "t_lb": s.t_lb,
                "t_ub": s.t_ub,
                "center": s.set.center.tolist(),
                "generators": s.set.generators.tolist(),
            }
            for s in log.samples
        ],
    }


def write_log(log: UncertainLog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_log_to_dict(log), fh, indent=2)
        fh.write("\n")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise LogFormatError(message)


def read_log(path) -> UncertainLog:
    """Parse and validate a log file; format violations name the offending sample."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"{path}: not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), f"{path}: top level must be an object")
    for key in ("horizon", "dim", "samples"):
        _require(key in doc, f"{path}: missing key {key!r}")
    horizon = doc["horizon"]
    dim = doc["dim"]
    _require(isinstance(horizon, int) and horizon >= 0, f"{path}: bad horizon")
    _require(isinstance(dim, int) and dim >= 1, f"{path}: bad dim")
    _require(isinstance(doc["samples"], list), f"{path}: samples must be a list")
    samples = []
    for i, entry in enumerate(doc["samples"]):
        _require(isinstance(entry, dict), f"{path}: sample {i} must be an object")
        for key in ("t_lb", "t_ub", "center"):
            _require(key in entry, f"{path}: sample {i} missing key {key!r}")
        t_lb, t_ub = entry["t_lb"], entry["t_ub"]
        _require(
            isinstance(t_lb, int) and isinstance(t_ub, int),
            f"{path}: sample {i} timestamps must be integers",
        )
        center = np.asarray(entry["center"], dtype=float)
        _require(center.shape == (dim,), f"{path}: sample {i} center has wrong length")
        raw_G = entry.get("generators", [])
        if raw_G in ([], None):
            G = np.zeros((dim, 0))
        else:
            G = np.asarray(raw_G, dtype=float)
            _require(
                G.ndim == 2 and G.shape[0] == dim,
                f"{path}: sample {i} generators must have {dim} rows",
            )
        try:
            samples.append(Sample(set=Zonotope(center, G), t_lb=t_lb, t_ub=t_ub))
        except (ValueError, LogFormatError) as exc:
            raise LogFormatError(f"{path}: sample {i}: {exc}") from exc
    try:
        return UncertainLog(samples, horizon)
    except LogFormatError as exc:
        raise LogFormatError(f"{path}: {exc}") from exc


def write_trace(trace: GroundTruthTrace, path) -> None:
    doc = {
        "seed": trace.seed,
        "mode": trace.mode,
        "states": trace.states.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_trace(path) -> GroundTruthTrace:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"{path}: not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), f"{path}: top level must be an object")
    for key in ("seed", "mode", "states"):
        _require(key in doc, f"{path}: missing key {key!r}")
    try:
        return GroundTruthTrace(
            states=np.asarray(doc["states"], dtype=float),
            seed=doc["seed"],
            mode=doc["mode"],
        )
    except ValueError as exc:
        raise LogFormatError(f"{path}: {exc}") from exc
