"""Interval-matrix linear systems and sound one-step reachability.

The plant model is ``x+ = A x`` where ``A`` is only known to lie in the
interval matrix ``[C - R, C + R]`` (entrywise, ``R >= 0``).  ``reach_step``
encloses every such transition — the member matrix may even change from step
to step, which makes the enclosure a superset of the fixed-but-unknown-matrix
semantics and therefore sound for both readings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .geometry import Zonotope, box_to_zonotope, interval_hull

__all__ = [
    "ReachTube",
    "UncertainLinearSystem",
    "reach",
    "reach_step",
    "reduce_to_box",
    "sample_member",
]


class UncertainLinearSystem:
    """Discrete-time system ``x+ = A x`` with ``A in [center - radius, center + radius]``."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius=None):
        C = np.asarray(center, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ValueError(f"center matrix must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise ValueError("center matrix must be finite")
        if radius is None:
            R = np.zeros_like(C)
        else:
            R = np.asarray(radius, dtype=float)
            if R.shape != C.shape:
                raise ValueError(
                    f"radius shape {R.shape} does not match center shape {C.shape}"
                )
            if not np.all(np.isfinite(R)):
                raise ValueError("radius matrix must be finite")
            if np.any(R < 0.0):
                raise ValueError("radius matrix must be entrywise >= 0")
        self.center = np.ascontiguousarray(C)
        self.radius = np.ascontiguousarray(R)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def is_exact(self) -> bool:
        return not np.any(self.radius > 0.0)

    def __repr__(self) -> str:
        kind = "exact" if self.is_exact else "uncertain"
        return f"UncertainLinearSystem(dim={self.dim}, {kind})"


@dataclass(frozen=True)
class ReachTube:
    """Reachable-set enclosures ``sets[i]`` after ``i + 1`` steps from the seed."""

    sets: tuple[Zonotope, ...]

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, i: int) -> Zonotope:
        return self.sets[i]

    @property
    def final(self) -> Zonotope:
        return self.sets[-1]


def sample_member(system: UncertainLinearSystem, rng: np.random.Generator) -> np.ndarray:
    """Draw one member matrix, each entry uniform in its interval."""
    if system.is_exact:
        return system.center.copy()
    offsets = rng.uniform(-1.0, 1.0, size=system.center.shape)
    return system.center + offsets * system.radius


def reduce_to_box(z: Zonotope, max_generators: int) -> Zonotope:
    """Coarsen to the interval hull when the order exceeds ``max_generators``.

    A no-op for ``max_generators <= 0`` (reduction disabled) or when the
    zonotope is already small enough.  The hull is a superset, so reduction
    preserves soundness at the cost of precision.
    """
    if max_generators <= 0 or z.num_generators <= max_generators:
        return z
    return box_to_zonotope(interval_hull(z))


def reach_step(
    system: UncertainLinearSystem, z: Zonotope, reduce_order: int = 0
) -> Zonotope:
    """Sound enclosure of ``{A x : A in the interval matrix, x in z}``.

    The center matrix maps ``z`` exactly; the uncertainty contributes an
    axis-aligned error term bounding ``|(A - center) x|`` over the interval
    hull of ``z``.  With zero radius the result represents ``center @ z``
    exactly (same center, linearly mapped generators, no error columns).
    """
    if z.dim != system.dim:
        raise ValueError(f"dimension mismatch: set {z.dim} vs system {system.dim}")
    kernels = _backend.active()
    c2, G2 = kernels.reach_step_arrays(
        system.center, system.radius, z.center, z.generators
    )
    return reduce_to_box(Zonotope(c2, G2), reduce_order)


def reach(
    system: UncertainLinearSystem, z: Zonotope, steps: int, reduce_order: int = 0
) -> ReachTube:
    """Enclosures for ``1 .. steps`` transitions from ``z`` (``steps >= 1``)."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    sets = []
    current = z
    for _ in range(steps):
        current = reach_step(system, current, reduce_order)
        sets.append(current)
    return ReachTube(tuple(sets))
