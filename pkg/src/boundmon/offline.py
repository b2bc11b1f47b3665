"""Offline safety monitor for uncertain logs.

Given an interval-matrix bounding model, an uncertain log, and a union of
unsafe regions, the monitor decides whether the logged evidence is consistent
with an unsafe execution.  The procedure:

1. Every logged sample is checked against the unsafe regions directly.
2. For every consecutive sample pair and every resolution of their timestamp
   intervals, the reachable sets at all strictly intermediate steps are
   propagated from the earlier sample.  An intermediate set that meets an
   unsafe region triggers *refinement*: the over-approximated intersection is
   propagated to the later sample's step, and only if that later sample is
   still reachable is the execution declared unsafe.  Failed refinements are
   discarded and monitoring continues from the un-intersected set.

Safe verdicts are sound over-approximations (no reachable unsafe execution is
missed); Unsafe verdicts may be spurious only because of over-approximation,
never because a timestamp resolution was skipped — the enumeration is
exhaustive.

Pair evaluations are independent, so they may run on a thread pool; results
are aggregated in pair order and the lexicographically smallest witness
``(pair, t_current, t_next, step)`` wins, making parallel output bitwise
identical to sequential output.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .dynamics import UncertainLinearSystem
from .geometry import (
    Box,
    Zonotope,
    box_to_zonotope,
    boxhull_intersect,
    default_epsilon,
    interval_hull,
    intersects,
)
from .logs import Sample, UncertainLog

__all__ = [
    "MonitorStats",
    "PairStats",
    "UnsafeSpec",
    "Verdict",
    "Witness",
    "monitor_offline",
    "refine",
    "verdict_to_dict",
]

SAFE = "Safe"
UNSAFE = "Unsafe"


class UnsafeSpec:
    """Union of unsafe regions, each a zonotope (typically a wide box)."""

    __slots__ = ("regions",)

    def __init__(self, regions):
        regions = tuple(regions)
        if not regions:
            raise ValueError("an unsafe specification needs at least one region")
        for i, region in enumerate(regions):
            if not isinstance(region, Zonotope):
                raise ValueError(f"region {i}: expected a Zonotope")
        dim = regions[0].dim
        for i, region in enumerate(regions):
            if region.dim != dim:
                raise ValueError(
                    f"region {i}: dimension {region.dim} differs from region 0 ({dim})"
                )
        self.regions = regions

    @property
    def dim(self) -> int:
        return self.regions[0].dim

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)


@dataclass(frozen=True)
class Witness:
    """Why the verdict is Unsafe.

    ``kind == "unsafe_sample"``: a logged sample itself meets an unsafe region.
    ``kind == "intermediate"``: under timestamp resolution ``t_current`` /
    ``t_next`` of pair ``pair_index``, the propagated set at ``step`` meets a
    region and the refined intersection ``region_box`` still reaches the next
    sample.
    """

    kind: str
    region_index: int
    region_box: Box | None
    sample_index: int | None = None
    pair_index: int | None = None
    t_current: int | None = None
    t_next: int | None = None
    step: int | None = None


@dataclass
class PairStats:
    """Work done while evaluating one consecutive sample pair."""

    pair_index: int
    reach_steps: int = 0
    refinements: int = 0
    refinement_hits: int = 0
    seconds: float = 0.0  # wall clock; never serialized


@dataclass
class MonitorStats:
    reach_steps: int = 0
    refinements: int = 0
    refinement_hits: int = 0
    pairs: list[PairStats] = field(default_factory=list)


@dataclass
class Verdict:
    outcome: str
    witness: Witness | None
    stats: MonitorStats
    eps: float
    horizon: int
    hulls: dict[int, tuple[np.ndarray, np.ndarray]] | None = None

    @property
    def is_safe(self) -> bool:
        return self.outcome == SAFE


def refine(
    system: UncertainLinearSystem,
    theta: Zonotope,
    unsafe_region: Zonotope,
    t_d: int,
    next_sample: Sample,
    eps: float | None = None,
    reduce_order: int = 0,
) -> bool:
    """Can the overlap of ``theta`` with the region still reach the next sample?

    The intersection is over-approximated by the overlap of interval hulls,
    propagated ``t_d`` steps (``t_d >= 1``), and tested against the next
    sample's set.  An empty overlap is tolerated and reported as False —
    nothing unsafe to propagate.
    """
    if t_d < 1:
        raise ValueError(f"t_d must be >= 1, got {t_d}")
    if eps is None:
        eps = default_epsilon()
    psi = boxhull_intersect(theta, unsafe_region)
    if psi is None:
        return False
    arrived, _ = _refine_arrays(
        system, box_to_zonotope(psi), t_d, next_sample.set, eps, reduce_order
    )
    return arrived


def _refine_arrays(system, seed_zonotope, t_d, target_set, eps, reduce_order):
    """Propagate ``t_d`` steps and test the final set only; returns (hit, steps)."""
    kernels = _backend.active()
    no_regions = np.zeros((0, system.dim))
    steps, _, c, G, _, _ = kernels.propagate_run(
        system.center,
        system.radius,
        seed_zonotope.center,
        seed_zonotope.generators,
        t_d,
        no_regions,
        no_regions,
        eps,
        reduce_order,
    )
    assert steps == t_d
    return intersects(Zonotope(c, G), target_set, eps), steps


def _merge_hull(hulls, step, lo, hi):
    entry = hulls.get(step)
    if entry is None:
        hulls[step] = (np.array(lo, dtype=float), np.array(hi, dtype=float))
    else:
        np.minimum(entry[0], lo, out=entry[0])
        np.maximum(entry[1], hi, out=entry[1])


@dataclass
class _PairResult:
    stats: PairStats
    witness: Witness | None
    hulls: dict[int, tuple[np.ndarray, np.ndarray]] | None


def _evaluate_pair(
    pair_index: int,
    current: Sample,
    nxt: Sample,
    system: UncertainLinearSystem,
    unsafe: UnsafeSpec,
    region_lo: np.ndarray,
    region_hi: np.ndarray,
    eps: float,
    reduce_order: int,
    collect_hulls: bool,
) -> _PairResult:
    """Exhaustively evaluate one consecutive pair under all timestamp resolutions.

    Iteration order — ``t_current`` ascending, ``t_next`` ascending, then the
    intermediate step ascending, then the region index — guarantees that the
    first witness found is the lexicographically smallest for this pair.
    """
    kernels = _backend.active()
    started = time.perf_counter()
    stats = PairStats(pair_index=pair_index)
    hulls: dict | None = {} if collect_hulls else None
    witness = None
    seed_hull = interval_hull(current.set)
    for t_current in range(current.t_lb, current.t_ub + 1):
        if witness is not None:
            break
        if collect_hulls:
            _merge_hull(hulls, t_current, seed_hull.lower, seed_hull.upper)
        for t_next in range(nxt.t_lb, nxt.t_ub + 1):
            intermediate = t_next - t_current - 1  # steps strictly between
            c = current.set.center
            G = current.set.generators
            p = 0
            while p < intermediate and witness is None:
                steps, stopped, c, G, lo_hist, hi_hist = kernels.propagate_run(
                    system.center,
                    system.radius,
                    c,
                    G,
                    intermediate - p,
                    region_lo,
                    region_hi,
                    eps,
                    reduce_order,
                )
                if collect_hulls:
                    for j in range(steps):
                        _merge_hull(hulls, t_current + p + 1 + j, lo_hist[j], hi_hist[j])
                stats.reach_steps += steps
                p += steps
                if not stopped:
                    break
                theta = Zonotope(c, G)
                for region_index, region in enumerate(unsafe.regions):
                    if not intersects(theta, region, eps):
                        continue
                    stats.refinements += 1
                    psi = boxhull_intersect(theta, region)
                    if psi is None:
                        continue
                    arrived, used = _refine_arrays(
                        system,
                        box_to_zonotope(psi),
                        t_next - (t_current + p),
                        nxt.set,
                        eps,
                        reduce_order,
                    )
                    stats.reach_steps += used
                    if arrived:
                        stats.refinement_hits += 1
                        witness = Witness(
                            kind="intermediate",
                            region_index=region_index,
                            region_box=psi,
                            pair_index=pair_index,
                            t_current=t_current,
                            t_next=t_next,
                            step=t_current + p,
                        )
                        break
            if witness is not None:
                break
    stats.seconds = time.perf_counter() - started
    return _PairResult(stats=stats, witness=witness, hulls=hulls)


def monitor_offline(
    system: UncertainLinearSystem,
    log: UncertainLog,
    unsafe: UnsafeSpec,
    eps: float | None = None,
    workers: int = 1,
    reduce_order: int = 0,
    collect_hulls: bool = False,
) -> Verdict:
    """Decide whether the log admits an unsafe execution of the bounding model.

    ``workers > 1`` evaluates sample pairs on a thread pool; the verdict,
    stats, and collected hulls are bitwise identical to a sequential run.
    ``reduce_order`` caps the generator count during propagation (0 disables
    reduction).  ``collect_hulls`` gathers per-step interval hulls of every
    propagated set for downstream CSV/plot emission.
    """
    if eps is None:
        eps = default_epsilon()
    if log.dim != system.dim:
        raise ValueError(f"dimension mismatch: log {log.dim} vs system {system.dim}")
    if unsafe.dim != system.dim:
        raise ValueError(
            f"dimension mismatch: unsafe regions {unsafe.dim} vs system {system.dim}"
        )
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    stats = MonitorStats()
    hulls: dict | None = {} if collect_hulls else None

    def finish(outcome, witness):
        return Verdict(
            outcome=outcome,
            witness=witness,
            stats=stats,
            eps=eps,
            horizon=log.horizon,
            hulls=hulls,
        )

    # Logged samples are evidence on their own: check them before propagating.
    for sample_index, sample in enumerate(log.samples):
        for region_index, region in enumerate(unsafe.regions):
            if intersects(sample.set, region, eps):
                witness = Witness(
                    kind="unsafe_sample",
                    region_index=region_index,
                    region_box=boxhull_intersect(sample.set, region),
                    sample_index=sample_index,
                )
                return finish(UNSAFE, witness)

    region_hulls = [interval_hull(r) for r in unsafe.regions]
    region_lo = np.array([h.lower for h in region_hulls])
    region_hi = np.array([h.upper for h in region_hulls])

    pair_count = len(log.samples) - 1
    pairs = log.samples

    def evaluate(k: int) -> _PairResult:
        return _evaluate_pair(
            k,
            pairs[k],
            pairs[k + 1],
            system,
            unsafe,
            region_lo,
            region_hi,
            eps,
            reduce_order,
            collect_hulls,
        )

    results: list[_PairResult] = []
    if workers == 1 or pair_count <= 1:
        for k in range(pair_count):
            result = evaluate(k)
            results.append(result)
            if result.witness is not None:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(evaluate, range(pair_count)):
                results.append(result)
                if result.witness is not None:
                    break  # later pairs are discarded unread

    witness = None
    for result in results:
        stats.pairs.append(result.stats)
        stats.reach_steps += result.stats.reach_steps
        stats.refinements += result.stats.refinements
        stats.refinement_hits += result.stats.refinement_hits
        if collect_hulls:
            for step, (lo, hi) in result.hulls.items():
                _merge_hull(hulls, step, lo, hi)
        if result.witness is not None:
            witness = result.witness
            break

    if witness is not None:
        return finish(UNSAFE, witness)

    if collect_hulls:
        last = log.samples[-1]
        last_hull = interval_hull(last.set)
        for t in range(last.t_lb, last.t_ub + 1):
            _merge_hull(hulls, t, last_hull.lower, last_hull.upper)
    return finish(SAFE, None)


def verdict_to_dict(verdict: Verdict) -> dict:
    """JSON-ready form of a verdict; deterministic, no wall-clock fields."""
    witness = None
    if verdict.witness is not None:
        w = verdict.witness
        witness = {"kind": w.kind, "region_index": w.region_index}
        if w.kind == "unsafe_sample":
            witness["sample_index"] = w.sample_index
        else:
            witness.update(
                pair_index=w.pair_index,
                t_current=w.t_current,
                t_next=w.t_next,
                step=w.step,
            )
        if w.region_box is not None:
            witness["region_lower"] = w.region_box.lower.tolist()
            witness["region_upper"] = w.region_box.upper.tolist()
    return {
        "outcome": verdict.outcome,
        "witness": witness,
        "stats": {
            "reach_steps": verdict.stats.reach_steps,
            "refinements": verdict.stats.refinements,
            "refinement_hits": verdict.stats.refinement_hits,
            "pairs": [
                {
                    "pair_index": p.pair_index,
                    "reach_steps": p.reach_steps,
                    "refinements": p.refinements,
                    "refinement_hits": p.refinement_hits,
                }
                for p in verdict.stats.pairs
            ],
        },
        "eps": verdict.eps,
        "horizon": verdict.horizon,
    }
