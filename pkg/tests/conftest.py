"""
Shared fixtures for the altlin test suite
"""

import numpy as np
import pytest

from altlin.oracle import reference_optimum
from altlin.problems.lasso import lasso_handles, random_lasso
from tests.helpers import BOUND_SIGMA

BOUND_SEEDS = list(range(10))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_lasso():
    return random_lasso(30, 50, 0.1, seed=1)


@pytest.fixture(scope="session")
def bound_instances():
    """The ten n=50, m=30, rho=0.1 lasso instances with cached oracle optima"""
    cases = []
    for seed in BOUND_SEEDS:
        inst = random_lasso(30, 50, 0.1, seed=seed)
        exact = lasso_handles(inst)
        smoothed = lasso_handles(inst, smoothed_g=BOUND_SIGMA)
        cases.append({
            "seed": seed,
            "inst": inst,
            "exact": exact,
            "smoothed": smoothed,
            "oracle_exact": reference_optimum(exact, tol=1e-12),
            "oracle_smoothed": reference_optimum(smoothed, tol=1e-12),
        })
    return cases
