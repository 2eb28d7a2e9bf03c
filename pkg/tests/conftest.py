"""Shared fixtures; expensive solves are session-scoped and reused."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from feketefield import (
    build_basis,
    ellipse_potential,
    ginibre,
    mittag_leffler,
    solve_fekete,
)

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def gin():
    return ginibre()


@pytest.fixture(scope="session")
def ml15():
    return mittag_leffler(1.5)


@pytest.fixture(scope="session")
def ell05():
    return ellipse_potential(0.5)


@pytest.fixture(scope="session")
def gin50(gin):
    """Converged Ginibre configuration with 50 points."""
    cfg, report = solve_fekete(gin, 50)
    assert report.converged
    return cfg


@pytest.fixture(scope="session")
def gin_basis100(gin):
    return build_basis(gin, 100)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260815)
