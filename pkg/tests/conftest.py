"""Shared test configuration: canonical parameters and deterministic hypothesis runs."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repro",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

#: The three rational parameters every cross-route grid runs over.
Q_CANON = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3))

#: Absolute tolerance for float routes checked against exact rationals.
FLOAT_TOL = 1e-8

#: Tolerance for contour quadrature against exact finite differences.
CONTOUR_TOL = 1e-10


@pytest.fixture(params=Q_CANON, ids=lambda q: f"q={q}")
def q_canon(request):
    return request.param


@pytest.fixture
def rng():
    """One fixed-seed generator per test, independent of the package's streams."""
    return np.random.default_rng(20260815)
