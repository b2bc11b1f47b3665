"""Pure-numpy kernels for the propagation hot loop.

This module is the reference backend; ``boundmon._kernels`` is a compiled
drop-in replacement built from ``_kernels.pyx``.  Both expose the same three
functions with identical semantics (including generator column order and the
exact-zero column-dropping rule), so either can serve the rest of the package.

Array conventions: centers are ``(n,)`` float64, generator matrices are
``(n, m)`` float64 with one generator per column.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def hull_bounds(c: np.ndarray, G: np.ndarray):
    """Interval hull of a zonotope: ``(lower, upper)`` arrays."""
    spread = np.abs(G).sum(axis=1)
    return c - spread, c + spread


def reach_step_arrays(C: np.ndarray, R: np.ndarray, c: np.ndarray, G: np.ndarray):
    """One sound propagation step of ``{A x : |A - C| <= R entrywise}``.

    The center matrix maps the set exactly; the radius contributes an
    axis-aligned error term whose half-widths bound ``|Delta @ x|`` over the
    interval hull of the input set.  All-zero generator columns are dropped;
    zero error half-widths produce no column.
    """
    n = c.shape[0]
    spread = np.abs(G).sum(axis=1)
    magnitude = np.abs(c) + spread
    d = R @ magnitude
    c2 = C @ c
    G2 = C @ G
    if G2.shape[1]:
        G2 = G2[:, np.any(G2 != 0.0, axis=0)]
    nz = np.flatnonzero(d > 0.0)
    if nz.size:
        E = np.zeros((n, nz.size))
        E[nz, np.arange(nz.size)] = d[nz]
        G2 = np.hstack([G2, E]) if G2.shape[1] else E
    return c2, G2


def _reduce_to_box(c: np.ndarray, G: np.ndarray):
    """Replace the generator matrix by its interval hull's box generators."""
    spread = np.abs(G).sum(axis=1)
    nz = np.flatnonzero(spread > 0.0)
    E = np.zeros((c.shape[0], nz.size))
    E[nz, np.arange(nz.size)] = spread[nz]
    return E


def propagate_run(
    C: np.ndarray,
    R: np.ndarray,
    c: np.ndarray,
    G: np.ndarray,
    max_steps: int,
    reg_lo: np.ndarray,
    reg_hi: np.ndarray,
    eps: float,
    reduce_at: int,
):
    """Propagate up to ``max_steps`` steps, stopping at the first candidate step.

    A step is a *candidate* when the propagated set's interval hull comes
    within ``eps`` of some region's bounding box (``reg_lo``/``reg_hi`` are
    ``(k, n)``; ``k = 0`` disables stopping).  Hull separation greater than
    ``eps`` certifies disjointness, so skipped steps need no exact test.

    When ``reduce_at > 0`` and a step leaves more than ``reduce_at`` generator
    columns, the set is coarsened to its interval hull before continuing.

    Returns ``(steps_done, stopped, c, G, lo_hist, hi_hist)`` where the
    histories hold one interval-hull row per completed step.
    """
    n = c.shape[0]
    lo_hist = np.empty((max_steps, n))
    hi_hist = np.empty((max_steps, n))
    have_regions = reg_lo.shape[0] > 0
    steps = 0
    stopped = False
    while steps < max_steps:
        c, G = reach_step_arrays(C, R, c, G)
        if reduce_at > 0 and G.shape[1] > reduce_at:
            G = _reduce_to_box(c, G)
        lo, hi = hull_bounds(c, G)
        lo_hist[steps] = lo
        hi_hist[steps] = hi
        steps += 1
        if have_regions:
            overlap = np.all((reg_lo <= hi + eps) & (lo <= reg_hi + eps), axis=1)
            if bool(overlap.any()):
                stopped = True
                break
    return steps, stopped, c, G, lo_hist[:steps], hi_hist[:steps]
