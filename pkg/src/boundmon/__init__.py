"""Reachability-based runtime safety monitoring of uncertain linear systems.

The package decides, from sparse and noisy logged observations (offline) or
from on-demand samples (online), whether a black-box system bounded by an
interval-matrix linear model could have entered an unsafe region.  Reachable
sets are zonotopes; intersection queries are exact up to a configurable
tolerance; Safe verdicts are sound.
"""

from ._backend import active_name as kernel_backend
from .configs import (
    ConfigError,
    LoggingDefaults,
    ModelConfig,
    load_config,
    shipped_config_names,
    shipped_config_path,
)
from .dynamics import (
    ReachTube,
    UncertainLinearSystem,
    reach,
    reach_step,
    reduce_to_box,
    sample_member,
)
from .geometry import (
    Box,
    GeometrySolverError,
    Zonotope,
    box_to_zonotope,
    boxhull_intersect,
    contains_point,
    default_epsilon,
    interval_hull,
    intersects,
    linear_map,
    minkowski_sum,
)
from .logs import (
    GroundTruthTrace,
    LogFormatError,
    Sample,
    UncertainLog,
    generate_log,
    read_log,
    read_trace,
    simulate_trace,
    write_log,
    write_trace,
)
from .offline import (
    MonitorStats,
    PairStats,
    UnsafeSpec,
    Verdict,
    Witness,
    monitor_offline,
    refine,
    verdict_to_dict,
)
from .online import (
    LoggerError,
    OnlineReport,
    SimulatedLogger,
    TriggerLogger,
    make_simulated_logger,
    monitor_online,
    report_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConfigError",
    "GeometrySolverError",
    "GroundTruthTrace",
    "LogFormatError",
    "LoggerError",
    "LoggingDefaults",
    "ModelConfig",
    "MonitorStats",
    "OnlineReport",
    "PairStats",
    "ReachTube",
    "Sample",
    "SimulatedLogger",
    "TriggerLogger",
    "UncertainLinearSystem",
    "UncertainLog",
    "UnsafeSpec",
    "Verdict",
    "Witness",
    "Zonotope",
    "box_to_zonotope",
    "boxhull_intersect",
    "contains_point",
    "default_epsilon",
    "generate_log",
    "interval_hull",
    "intersects",
    "kernel_backend",
    "linear_map",
    "load_config",
    "minkowski_sum",
    "monitor_offline",
    "monitor_online",
    "make_simulated_logger",
    "reach",
    "reach_step",
    "read_log",
    "read_trace",
    "reduce_to_box",
    "refine",
    "report_to_dict",
    "sample_member",
    "shipped_config_names",
    "shipped_config_path",
    "simulate_trace",
    "verdict_to_dict",
    "write_log",
    "write_trace",
]
