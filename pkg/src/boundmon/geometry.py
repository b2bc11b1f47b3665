"""Zonotope and box arithmetic with exact, tolerance-aware set queries.

A zonotope is the affine image of a unit cube: ``{c + G @ a : a in [-1, 1]^m}``
with center ``c`` and generator matrix ``G``.  Zonotopes are closed under
linear maps and Minkowski sums, which makes them the working set
representation for the reachability monitors in this package.

Intersection and membership queries are decided by a small linear program
(minimal max-norm residual of the coupling equation) and are exact up to the
equality tolerance ``epsilon``; borderline instances are reported as
intersecting, which is the conservative direction for safety monitoring.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "Box",
    "GeometrySolverError",
    "Zonotope",
    "box_to_zonotope",
    "boxhull_intersect",
    "contains_point",
    "default_epsilon",
    "interval_hull",
    "intersects",
    "linear_map",
    "minkowski_sum",
]

EPSILON_ENV_VAR = "BOUNDMON_EPS"
_DEFAULT_EPSILON = 1e-9


class GeometrySolverError(RuntimeError):
    """The feasibility LP failed; the query result is unknown, not 'disjoint'."""


def default_epsilon() -> float:
    """Equality tolerance for set queries; ``BOUNDMON_EPS`` overrides 1e-9."""
    raw = os.environ.get(EPSILON_ENV_VAR)
    if raw is None or raw.strip() == "":
        return _DEFAULT_EPSILON
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{EPSILON_ENV_VAR} must be a float, got {raw!r}") from None
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"{EPSILON_ENV_VAR} must be finite and >= 0, got {raw!r}")
    return value


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-dimension lower and upper bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_vector(self.lower, "lower")
        upper = _as_vector(self.upper, "upper")
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lower > upper):
            raise ValueError("box must satisfy lower <= upper in every dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _as_vector(x, "x")
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


class Zonotope:
    """Centrally symmetric convex set ``{center + generators @ a : |a| <= 1}``.

    Parameters
    ----------
    center : array_like, shape (n,)
    generators : array_like, shape (n, m)
        One generator per column.  All-zero columns carry no extent and are
        dropped on construction; ``m = 0`` represents a single point.
    """

    __slots__ = ("center", "generators", "_axis_box")

    def __init__(self, center, generators=None):
        center = _as_vector(center, "center")
        n = center.shape[0]
        if n == 0:
            raise ValueError("zonotope dimension must be positive")
        if generators is None:
            G = np.zeros((n, 0))
        else:
            G = np.asarray(generators, dtype=float)
            if G.ndim != 2:
                raise ValueError(f"generators must be a matrix, got shape {G.shape}")
            if G.shape[0] != n:
                raise ValueError(
                    f"generators have {G.shape[0]} rows but the center has dimension {n}"
                )
            if not np.all(np.isfinite(G)):
                raise ValueError("generators must be finite")
            keep = np.any(G != 0.0, axis=0)
            G = G[:, keep]
        self.center = np.ascontiguousarray(center)
        self.generators = np.ascontiguousarray(G)
        self._axis_box = None

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def num_generators(self) -> int:
        return self.generators.shape[1]

    @property
    def is_axis_aligned_box(self) -> bool:
        """True when every generator lies on a coordinate axis.

        Such a zonotope equals its own interval hull, so interval tests decide
        membership and intersection exactly without an LP.
        """
        if self._axis_box is None:
            G = self.generators
            self._axis_box = bool(np.all(np.count_nonzero(G, axis=0) <= 1))
        return self._axis_box

    @classmethod
    def point(cls, center) -> "Zonotope":
        return cls(center)

    def __repr__(self) -> str:
        return f"Zonotope(dim={self.dim}, generators={self.num_generators})"


def linear_map(A, z: Zonotope) -> Zonotope:
    """Image of a zonotope under the linear map ``x -> A @ x``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != z.dim:
        raise ValueError(f"matrix shape {A.shape} does not accept dimension {z.dim}")
    return Zonotope(A @ z.center, A @ z.generators)


def minkowski_sum(z1: Zonotope, z2: Zonotope) -> Zonotope:
    """Minkowski sum: centers add, generator columns concatenate."""
    if z1.dim != z2.dim:
        raise ValueError(f"dimension mismatch: {z1.dim} vs {z2.dim}")
    return Zonotope(z1.center + z2.center, np.hstack([z1.generators, z2.generators]))


def interval_hull(z: Zonotope) -> Box:
    """Tightest axis-aligned box containing the zonotope.

    Per dimension ``i`` the extent is ``center_i ± sum_j |G_ij|``.
    """
    spread = np.abs(z.generators).sum(axis=1)
    return Box(z.center - spread, z.center + spread)


def box_to_zonotope(box: Box) -> Zonotope:
    """Exact zonotope form of a box: one axis-aligned generator per dimension."""
    return Zonotope(box.center, np.diag(box.radius))


def boxhull_intersect(z1: Zonotope, z2: Zonotope) -> Box | None:
    """Over-approximate intersection: the overlap of the two interval hulls.

    Returns ``None`` when the hulls are disjoint.  The result is a superset of
    the exact intersection ``z1 ∩ z2``, which is what a sound monitor needs
    when it has to *compute* (not just test) an intersection.
    """
    h1 = interval_hull(z1)
    h2 = interval_hull(z2)
    lower = np.maximum(h1.lower, h2.lower)
    upper = np.minimum(h1.upper, h2.upper)
    if np.any(lower > upper):
        return None
    return Box(lower, upper)


def _hull_gap(z1: Zonotope, z2: Zonotope) -> float:
    """Largest per-dimension separation of the interval hulls (<= 0 if they overlap)."""
    h1 = interval_hull(z1)
    h2 = interval_hull(z2)
    gaps = np.maximum(h2.lower - h1.upper, h1.lower - h2.upper)
    return float(np.max(gaps))


def _min_residual(c1, G1, c2, G2) -> float:
    """Minimal max-norm residual ``t`` of ``G1 a - G2 b = c2 - c1`` over the unit cubes.

    The two sets intersect exactly when ``t = 0``; ``t`` equals the L-infinity
    distance between them otherwise.  Formulated as an always-feasible LP so a
    solver "infeasible" status can only mean numerical failure.
    """
    n = c1.shape[0]
    m1 = G1.shape[1]
    m2 = G2.shape[1]
    delta = c2 - c1
    if m1 + m2 == 0:
        return float(np.max(np.abs(delta)))
    M = np.hstack([G1, -G2])
    ones = np.ones((n, 1))
    A_ub = np.vstack([np.hstack([M, -ones]), np.hstack([-M, -ones])])
    b_ub = np.concatenate([delta, -delta])
    cost = np.zeros(m1 + m2 + 1)
    cost[-1] = 1.0
    bounds = [(-1.0, 1.0)] * (m1 + m2) + [(0.0, None)]
    result = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0:
        raise GeometrySolverError(
            f"feasibility LP failed with status {result.status}: {result.message}"
        )
    return max(float(result.fun), 0.0)


def intersects(z1: Zonotope, z2: Zonotope, eps: float | None = None) -> bool:
    """Exact intersection test, conservative within ``eps``.

    Decides whether the sets share a point by minimizing the max-norm residual
    of ``c1 + G1 a = c2 + G2 b``; residuals at most ``eps`` count as
    intersecting (touching boundaries therefore do).  Hull-disjointness by
    more than ``eps`` and the all-boxes case are decided without the LP; both
    shortcuts agree exactly with the LP's answer.

    Raises
    ------
    GeometrySolverError
        If the LP solver fails; the query is never silently resolved.
    """
    if z1.dim != z2.dim:
        raise ValueError(f"dimension mismatch: {z1.dim} vs {z2.dim}")
    if eps is None:
        eps = default_epsilon()
    if _hull_gap(z1, z2) > eps:
        return False
    if z1.is_axis_aligned_box and z2.is_axis_aligned_box:
        return True
    t = _min_residual(z1.center, z1.generators, z2.center, z2.generators)
    return t <= eps


def contains_point(z: Zonotope, x, eps: float | None = None) -> bool:
    """Point membership, conservative within ``eps`` (points on the boundary count)."""
    x = _as_vector(x, "x")
    if x.shape[0] != z.dim:
        raise ValueError(f"dimension mismatch: point {x.shape[0]} vs set {z.dim}")
    if eps is None:
        eps = default_epsilon()
    hull = interval_hull(z)
    gaps = np.maximum(hull.lower - x, x - hull.upper)
    if float(np.max(gaps)) > eps:
        return False
    if z.is_axis_aligned_box:
        return True
    t = _min_residual(z.center, z.generators, x, np.zeros((z.dim, 0)))
    return t <= eps
