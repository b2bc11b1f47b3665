"""Shared construction helpers for the test suite.

Everything here is deterministic: tests pass explicit integer seeds and the
helpers derive all randomness from them, so failures replay exactly.
"""

import numpy as np
import pytest

from boundmon import Box, UncertainLinearSystem, Zonotope


def random_zonotope(rng, dim, max_generators=4, center_scale=2.0, gen_scale=1.0):
    """A random zonotope with 0..max_generators dense generators."""
    m = int(rng.integers(0, max_generators + 1))
    center = rng.uniform(-center_scale, center_scale, dim)
    generators = rng.uniform(-gen_scale, gen_scale, (dim, m))
    return Zonotope(center, generators)


def random_system(rng, dim, spectral_cap=1.05, radius_scale=0.02):
    """A random interval-matrix system with bounded center spectral radius."""
    C = rng.uniform(-1.0, 1.0, (dim, dim))
    rho = max(np.abs(np.linalg.eigvals(C)))
    if rho > 0:
        C *= rng.uniform(0.4, spectral_cap) / rho
    R = rng.uniform(0.0, radius_scale, (dim, dim)) * (rng.random((dim, dim)) < 0.5)
    return UncertainLinearSystem(C, R)


def random_point_in(rng, z: Zonotope) -> np.ndarray:
    alpha = rng.uniform(-1.0, 1.0, z.num_generators)
    return z.center + z.generators @ alpha


def box_region(lower, upper) -> Zonotope:
    """Axis-aligned unsafe region as a zonotope."""
    box = Box(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
    return Zonotope(box.center, np.diag(box.radius))


@pytest.fixture
def rng():
    """Default deterministic generator; tests needing other seeds build their own."""
    return np.random.default_rng(1234)
