"""Benchmark model configurations: JSON schema, validation, discretization.

A config file fully describes a monitoring scenario: the interval-matrix
bounding model (given directly in discrete time or as a continuous-time
matrix pair plus a discretization rule), the initial set, the unsafe regions
(axis-aligned boxes, unbounded faces clipped at a large recorded bound), the
horizon, and logging defaults.  Validation errors name the offending field by
path.

Constant-but-uncertain inputs are modeled as augmented state dimensions: an
identity self-dynamics row and an interval initial value (see the shipped
files for worked examples).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .dynamics import UncertainLinearSystem
from .geometry import Box, Zonotope, box_to_zonotope
from .offline import UnsafeSpec

__all__ = [
    "ConfigError",
    "LoggingDefaults",
    "ModelConfig",
    "load_config",
    "shipped_config_path",
    "shipped_config_names",
]

DISCRETIZATION_METHODS = ("euler", "expm")
DEFAULT_UNSAFE_BOUND = 1e6


class ConfigError(ValueError):
    """A config file violates the schema; the message names the field path."""


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _get(doc: dict, path: str, key: str, kind, required: bool = True, default=None):
    if key not in doc:
        if required:
            _fail(path, f"missing required key {key!r}")
        return default
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        _fail(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _matrix(raw, path: str, rows: int | None = None, cols: int | None = None):
    try:
        M = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "must be a numeric matrix")
    if M.ndim != 2:
        _fail(path, f"must be two-dimensional, got shape {M.shape}")
    if rows is not None and M.shape[0] != rows:
        _fail(path, f"expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        _fail(path, f"expected {cols} columns, got {M.shape[1]}")
    if not np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(M))[0]
        _fail(f"{path}[{bad[0]}][{bad[1]}]", "must be finite")
    return M


def _vector(raw, path: str, length: int | None = None):
    try:
        v = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "must be a numeric vector")
    if v.ndim != 1:
        _fail(path, f"must be one-dimensional, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        _fail(path, f"expected length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        _fail(f"{path}[{int(np.flatnonzero(~np.isfinite(v))[0])}]", "must be finite")
    return v


def _box(raw, path: str, dim: int | None = None) -> Box:
    intervals = _matrix(raw, path, rows=None, cols=2)
    if dim is not None and intervals.shape[0] != dim:
        _fail(path, f"expected {dim} rows of [lo, hi], got {intervals.shape[0]}")
    lower, upper = intervals[:, 0], intervals[:, 1]
    for i in range(intervals.shape[0]):
        if lower[i] > upper[i]:
            _fail(f"{path}[{i}]", f"lower bound {lower[i]} exceeds upper bound {upper[i]}")
    return Box(lower, upper)


@dataclass(frozen=True)
class LoggingDefaults:
    p_log: float
    t_delta: int
    sensor_radius: np.ndarray


@dataclass(frozen=True)
class ModelConfig:
    name: str
    system: UncertainLinearSystem
    initial: Zonotope
    unsafe: UnsafeSpec
    horizon: int
    logging: LoggingDefaults
    seed: int
    trace_mode: str
    state_names: tuple[str, ...]
    profiles: dict[str, float]
    unsafe_bound: float
    discretization: dict

    @property
    def dim(self) -> int:
        return self.system.dim


def _parse_dynamics(doc: dict, path: str) -> tuple[UncertainLinearSystem, dict]:
    kind = _get(doc, path, "kind", str, required=False, default="discrete")
    if kind not in ("discrete", "continuous"):
        _fail(f"{path}.kind", f"must be 'discrete' or 'continuous', got {kind!r}")
    if "center" not in doc:
        _fail(path, "missing required key 'center'")
    C = _matrix(doc["center"], f"{path}.center")
    if C.shape[0] != C.shape[1]:
        _fail(f"{path}.center", f"must be square, got shape {C.shape}")
    n = C.shape[0]
    if "radius" in doc:
        R = _matrix(doc["radius"], f"{path}.radius", rows=n, cols=n)
        bad = np.argwhere(R < 0.0)
        if bad.size:
            i, j = bad[0]
            _fail(f"{path}.radius[{i}][{j}]", f"must be >= 0, got {R[i, j]}")
    else:
        R = np.zeros((n, n))
    meta = {"kind": kind}
    if kind == "continuous":
        method = _get(doc, path, "method", str, required=False, default="euler")
        if method not in DISCRETIZATION_METHODS:
            _fail(f"{path}.method", f"must be one of {DISCRETIZATION_METHODS}")
        step = _get(doc, path, "step_size", float)
        if step <= 0:
            _fail(f"{path}.step_size", f"must be > 0, got {step}")
        meta.update(method=method, step_size=step)
        if method == "euler":
            C_d = np.eye(n) + step * C
        else:
            from scipy.linalg import expm

            C_d = expm(step * C)
        R_d = step * R
        return UncertainLinearSystem(C_d, R_d), meta
    return UncertainLinearSystem(C, R), meta


def _parse_initial(doc, path: str, dim: int) -> Zonotope:
    if not isinstance(doc, dict):
        _fail(path, "must be an object")
    if "box" in doc:
        return box_to_zonotope(_box(doc["box"], f"{path}.box", dim))
    if "center" not in doc:
        _fail(path, "must contain either 'box' or 'center' (+ optional 'generators')")
    center = _vector(doc["center"], f"{path}.center", dim)
    if "generators" in doc and doc["generators"] not in ([], None):
        G = _matrix(doc["generators"], f"{path}.generators", rows=dim)
    else:
        G = np.zeros((dim, 0))
    return Zonotope(center, G)


def _parse_unsafe(doc, path: str, dim: int) -> tuple[UnsafeSpec, float]:
    if not isinstance(doc, dict):
        _fail(path, "must be an object")
    bound = _get(doc, path, "bound", float, required=False, default=DEFAULT_UNSAFE_BOUND)
    if bound <= 0:
        _fail(f"{path}.bound", f"must be > 0, got {bound}")
    raw_regions = doc.get("regions")
    if not isinstance(raw_regions, list) or not raw_regions:
        _fail(f"{path}.regions", "must be a non-empty list")
    regions = []
    for i, entry in enumerate(raw_regions):
        region_path = f"{path}.regions[{i}]"
        if not isinstance(entry, dict) or "box" not in entry:
            _fail(region_path, "must be an object with a 'box' key")
        box = _box(entry["box"], f"{region_path}.box", dim)
        if np.any(np.abs(box.lower) > bound) or np.any(np.abs(box.upper) > bound):
            _fail(f"{region_path}.box", f"bounds exceed the configured bound {bound}")
        regions.append(box_to_zonotope(box))
    return UnsafeSpec(regions), bound


def load_config(path) -> ModelConfig:
    """Parse and validate a model configuration file."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")

    name = _get(doc, "$", "name", str)
    dynamics_doc = doc.get("dynamics")
    if not isinstance(dynamics_doc, dict):
        _fail("$.dynamics", "must be an object")
    system, discretization = _parse_dynamics(dynamics_doc, "$.dynamics")
    n = system.dim

    initial = _parse_initial(doc.get("initial"), "$.initial", n)
    unsafe, bound = _parse_unsafe(doc.get("unsafe"), "$.unsafe", n)

    horizon = _get(doc, "$", "horizon", int)
    if horizon < 1:
        _fail("$.horizon", f"must be >= 1, got {horizon}")

    logging_doc = doc.get("logging")
    if not isinstance(logging_doc, dict):
        _fail("$.logging", "must be an object")
    p_log = _get(logging_doc, "$.logging", "p_log", float)
    if not 0.0 <= p_log <= 1.0:
        _fail("$.logging.p_log", f"must be in [0, 1], got {p_log}")
    t_delta = _get(logging_doc, "$.logging", "t_delta", int, required=False, default=0)
    if t_delta < 0:
        _fail("$.logging.t_delta", f"must be >= 0, got {t_delta}")
    radius = _vector(
        logging_doc.get("sensor_radius", [0.0] * n), "$.logging.sensor_radius", n
    )
    if np.any(radius < 0.0):
        _fail(
            f"$.logging.sensor_radius[{int(np.flatnonzero(radius < 0.0)[0])}]",
            "must be >= 0",
        )

    seed = _get(doc, "$", "seed", int, required=False, default=0)
    trace_mode = _get(doc, "$", "trace_mode", str, required=False, default="per-step")
    if trace_mode not in ("per-step", "fixed"):
        _fail("$.trace_mode", f"must be 'per-step' or 'fixed', got {trace_mode!r}")

    state_names = doc.get("state_names", [f"x{i}" for i in range(n)])
    if (
        not isinstance(state_names, list)
        or len(state_names) != n
        or not all(isinstance(s, str) for s in state_names)
    ):
        _fail("$.state_names", f"must be a list of {n} strings")

    profiles = doc.get("profiles", {})
    if not isinstance(profiles, dict) or not all(
        isinstance(k, str) and isinstance(v, (int, float)) and 0.0 <= float(v) <= 1.0
        for k, v in profiles.items()
    ):
        _fail("$.profiles", "must map profile names to probabilities in [0, 1]")

    return ModelConfig(
        name=name,
        system=system,
        initial=initial,
        unsafe=unsafe,
        horizon=horizon,
        logging=LoggingDefaults(
            p_log=p_log, t_delta=int(t_delta), sensor_radius=radius
        ),
        seed=seed,
        trace_mode=trace_mode,
        state_names=tuple(state_names),
        profiles={k: float(v) for k, v in profiles.items()},
        unsafe_bound=bound,
        discretization=discretization,
    )


def shipped_config_names() -> list[str]:
    """Names of the benchmark configs bundled with the package."""
    root = resources.files(__package__) / "configs"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def shipped_config_path(name: str):
    """Filesystem path of a bundled benchmark config."""
    path = resources.files(__package__) / "configs" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(
            f"no shipped config named {name!r}; available: {shipped_config_names()}"
        )
    return path
