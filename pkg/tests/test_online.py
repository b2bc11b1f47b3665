"""Online monitor: trigger-on-demand sampling, resets, logger failure handling."""

import numpy as np
import pytest

from boundmon import (
    GroundTruthTrace,
    LoggerError,
    SimulatedLogger,
    UncertainLinearSystem,
    UnsafeSpec,
    Zonotope,
    contains_point,
    make_simulated_logger,
    monitor_online,
    report_to_dict,
    simulate_trace,
)
from conftest import box_region


def trace_from_states(states):
    return GroundTruthTrace(np.atleast_2d(np.asarray(states, dtype=float)).T, None, "fixed")


def growth_trace(rate, x0, horizon):
    return trace_from_states([x0 * rate**t for t in range(horizon + 1)])


# --- benign and trivially unsafe runs --------------------------------------------


def test_benign_run_triggers_only_at_step_zero():
    system = UncertainLinearSystem([[0.9]])
    trace = growth_trace(0.9, 1.0, 20)
    logger = SimulatedLogger(trace, 0.0)
    unsafe = UnsafeSpec([box_region([50.0], [60.0])])
    report = monitor_online(system, logger, unsafe, horizon=20)
    assert report.outcome == "Safe"
    assert report.is_safe
    assert report.unsafe_step is None
    assert report.triggered_steps == [0]
    assert logger.trigger_count == 1
    assert report.reach_steps == 20


def test_unsafe_at_step_zero_needs_no_propagation():
    system = UncertainLinearSystem([[1.0]])
    logger = SimulatedLogger(trace_from_states([5.0, 5.0]), 0.0)
    unsafe = UnsafeSpec([box_region([4.0], [6.0])])
    report = monitor_online(system, logger, unsafe, horizon=1)
    assert report.outcome == "Unsafe"
    assert report.unsafe_step == 0
    assert report.triggered_steps == [0]
    assert report.reach_steps == 0


def test_exact_logger_flags_first_truly_unsafe_step():
    # x+ = 1.2 x from 1.0 crosses 3.0 between steps 6 and 7; with a
    # zero-radius logger and exact dynamics the monitor is exact too.
    system = UncertainLinearSystem([[1.2]])
    trace = growth_trace(1.2, 1.0, 10)
    logger = SimulatedLogger(trace, 0.0)
    unsafe = UnsafeSpec([box_region([3.0], [1e6])])
    report = monitor_online(system, logger, unsafe, horizon=10)
    assert report.outcome == "Unsafe"
    assert report.unsafe_step == 7
    assert report.triggered_steps[-1] == 7


def test_skirting_trace_triggers_then_clears():
    # System uncertainty pushes the tube into the band, but every fresh
    # sample lands outside it: the run stays Safe at the cost of triggers.
    system = UncertainLinearSystem([[1.0]], [[0.05]])
    trace = trace_from_states([2.9] * 13)
    logger = SimulatedLogger(trace, 0.01)
    unsafe = UnsafeSpec([box_region([3.05], [4.0])])
    report = monitor_online(system, logger, unsafe, horizon=12)
    assert report.outcome == "Safe"
    assert len(report.triggered_steps) > 1
    assert report.triggered_steps[0] == 0
    assert logger.trigger_count == len(report.triggered_steps)


def test_horizon_zero_checks_only_the_initial_sample():
    system = UncertainLinearSystem([[2.0]])
    logger = SimulatedLogger(trace_from_states([1.0]), 0.0)
    unsafe = UnsafeSpec([box_region([3.0], [4.0])])
    report = monitor_online(system, logger, unsafe, horizon=0)
    assert report.outcome == "Safe"
    assert report.reach_steps == 0
    assert report.triggered_steps == [0]


# --- agreement with ground truth -------------------------------------------------


def test_zero_radius_logger_matches_brute_force_on_random_instance():
    rng = np.random.default_rng(77)
    system = UncertainLinearSystem(
        [[0.95, -0.2], [0.2, 0.95]], [[1e-4, 0.0], [0.0, 1e-4]]
    )
    initial = Zonotope([1.5, 0.0], np.diag([0.05, 0.05]))
    trace = simulate_trace(system, initial, horizon=60, rng=rng, mode="fixed")
    unsafe = UnsafeSpec([box_region([-2.0, 0.9], [2.0, 2.0])])

    logger = SimulatedLogger(trace, 0.0)
    report = monitor_online(system, logger, unsafe, horizon=60)

    truly_unsafe = [
        t
        for t in range(61)
        if any(contains_point(r, trace.states[t]) for r in unsafe.regions)
    ]
    if truly_unsafe:
        assert report.outcome == "Unsafe"
        assert report.unsafe_step == truly_unsafe[0]
    else:
        assert report.outcome == "Safe"


def test_collect_hulls_covers_true_states_in_safe_run():
    system = UncertainLinearSystem([[0.99, -0.1], [0.1, 0.99]], np.full((2, 2), 1e-5))
    rng = np.random.default_rng(5)
    initial = Zonotope([1.0, 0.0], np.diag([0.02, 0.02]))
    trace = simulate_trace(system, initial, horizon=40, rng=rng, mode="per-step")
    logger = SimulatedLogger(trace, 0.05)
    unsafe = UnsafeSpec([box_region([40.0, 40.0], [50.0, 50.0])])
    report = monitor_online(system, logger, unsafe, horizon=40, collect_hulls=True)
    assert report.outcome == "Safe"
    assert sorted(report.hulls) == list(range(41))
    for t, (lo, hi) in report.hulls.items():
        assert np.all(trace.states[t] >= lo - 1e-9)
        assert np.all(trace.states[t] <= hi + 1e-9)
    assert 0 in report.trigger_hulls


# --- logger failure and validation -----------------------------------------------


class _ExplodingLogger:
    def __init__(self, fail_at):
        self.fail_at = fail_at

    def trigger(self, t):
        if t >= self.fail_at:
            raise RuntimeError("sensor bus offline")
        return Zonotope([2.9], [[0.01]])


def test_logger_failure_surfaces_as_logger_error():
    system = UncertainLinearSystem([[1.0]], [[0.05]])
    unsafe = UnsafeSpec([box_region([3.05], [4.0])])
    with pytest.raises(LoggerError, match="sensor bus offline"):
        monitor_online(system, _ExplodingLogger(fail_at=1), unsafe, horizon=12)
    with pytest.raises(LoggerError):
        monitor_online(system, _ExplodingLogger(fail_at=0), unsafe, horizon=12)


class _WrongDimLogger:
    def trigger(self, t):
        return Zonotope([1.0, 2.0])


def test_invalid_logger_sample_rejected():
    system = UncertainLinearSystem([[1.0]])
    unsafe = UnsafeSpec([box_region([3.0], [4.0])])
    with pytest.raises(LoggerError, match="invalid sample"):
        monitor_online(system, _WrongDimLogger(), unsafe, horizon=3)


def test_simulated_logger_validation():
    trace = trace_from_states([1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        SimulatedLogger(trace, [0.1, 0.1])  # wrong length
    with pytest.raises(ValueError):
        SimulatedLogger(trace, -0.5)
    logger = make_simulated_logger(trace, 0.25)
    sample = logger.trigger(2)
    np.testing.assert_allclose(sample.center, [1.0])
    np.testing.assert_allclose(sample.generators, [[0.25]])
    with pytest.raises(LoggerError):
        logger.trigger(3)
    with pytest.raises(LoggerError):
        logger.trigger(-1)


def test_monitor_online_input_validation():
    system = UncertainLinearSystem([[1.0]])
    logger = SimulatedLogger(trace_from_states([1.0, 1.0]), 0.0)
    with pytest.raises(ValueError):
        monitor_online(system, logger, UnsafeSpec([box_region([3.0], [4.0])]), horizon=-1)
    with pytest.raises(ValueError):
        monitor_online(
            system, logger, UnsafeSpec([box_region([0, 0], [1, 1])]), horizon=1
        )


# --- reporting --------------------------------------------------------------------


def test_report_to_dict_and_trigger_fraction():
    system = UncertainLinearSystem([[0.9]])
    logger = SimulatedLogger(growth_trace(0.9, 1.0, 9), 0.0)
    unsafe = UnsafeSpec([box_region([50.0], [60.0])])
    report = monitor_online(system, logger, unsafe, horizon=9, eps=1e-6)
    doc = report_to_dict(report)
    assert doc["outcome"] == "Safe"
    assert doc["unsafe_step"] is None
    assert doc["triggered_steps"] == [0]
    assert doc["stats"]["triggers"] == 1
    assert doc["stats"]["trigger_fraction"] == pytest.approx(0.1)
    assert doc["eps"] == 1e-6
    assert report.trigger_fraction == pytest.approx(0.1)
