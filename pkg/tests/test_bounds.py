"""
Complexity bounds, monotonicity and acceleration on the ten reference lasso
instances (n=50, m=30, rho=0.1, smoothing sigma=1e-3)
"""

import math

import numpy as np
import pytest

from altlin.oracle import BoundConstants, check_bound
from altlin.solvers import (
    SolverConfig,
    run_alm,
    run_alm_s,
    run_alm_s_equiv,
    run_falm,
    run_falm_s,
    run_fista,
    run_ista,
    run_sadal,
)
from tests.helpers import BOUND_SIGMA, assert_non_increasing

pytestmark = pytest.mark.slow

ITERATIONS = 2000
TARGET_GAPS = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]


def exact_mu(case):
    return 1.0 / case["inst"].lipschitz


def smoothed_mu(case):
    return min(1.0 / case["inst"].lipschitz, BOUND_SIGMA)


def constants(case, smoothed, mu):
    oracle = case["oracle_smoothed"] if smoothed else case["oracle_exact"]
    return BoundConstants(mu=mu, x0_minus_xstar_sq=float(oracle.x_star @ oracle.x_star), f_star=oracle.f_star)


def test_oracles_are_certified(bound_instances):
    for case in bound_instances:
        assert case["oracle_exact"].certified
        assert case["oracle_smoothed"].certified


@pytest.mark.parametrize("kind,runner,smoothed", [
    ("alm", run_alm, True),
    ("falm", run_falm, True),
    ("alm_s", run_alm_s, False),
    ("alm_s", run_alm_s_equiv, False),
    ("falm_s", run_falm_s, False),
    ("ista", run_ista, False),
    ("fista", run_fista, False),
])
def test_bound_holds_on_every_instance(bound_instances, kind, runner, smoothed):
    for case in bound_instances:
        mu = smoothed_mu(case) if smoothed else exact_mu(case)
        obj = case["smoothed"] if smoothed else case["exact"]
        trace = runner(obj, SolverConfig(mu=mu, max_iter=ITERATIONS))
        report = check_bound(trace, kind, constants(case, smoothed, mu))
        assert report.passed, f"seed {case['seed']}: {report}"
        assert report.checked == ITERATIONS


def test_alm_is_monotone(bound_instances):
    for case in bound_instances:
        trace = run_alm(case["smoothed"], SolverConfig(mu=smoothed_mu(case), max_iter=ITERATIONS))
        assert_non_increasing(trace.objectives())
        assert_non_increasing([r.obj_x for r in trace.records])


def test_alm_s_is_monotone(bound_instances):
    for case in bound_instances:
        trace = run_alm_s(case["exact"], SolverConfig(mu=exact_mu(case), max_iter=ITERATIONS))
        assert_non_increasing(trace.objectives())
        assert_non_increasing([r.obj_x for r in trace.records])
        for r in trace.records:
            assert r.obj <= r.obj_x + 1e-12 * (1 + abs(r.obj_x))


@pytest.mark.parametrize("runner", [run_alm_s, run_fista, run_sadal])
def test_never_below_the_optimum(bound_instances, runner):
    for case in bound_instances:
        trace = runner(case["exact"], SolverConfig(mu=exact_mu(case), max_iter=500))
        assert trace.objectives().min() >= case["oracle_exact"].f_star - 1e-9


def _iterations(trace, target):
    hit = trace.iterations_to_target(target)
    return math.inf if hit is None else hit


@pytest.mark.parametrize("slow_runner,fast_runner", [(run_ista, run_fista), (run_alm_s, run_falm_s)])
def test_acceleration_on_lasso(bound_instances, slow_runner, fast_runner):
    for case in bound_instances[:5]:
        target = case["oracle_exact"].f_star + 1e-6
        config = SolverConfig(mu=exact_mu(case), max_iter=20000, obj_target=target)
        slow = _iterations(slow_runner(case["exact"], config), target)
        fast = _iterations(fast_runner(case["exact"], config), target)
        assert fast < slow, f"seed {case['seed']}: {fast} vs {slow}"


def test_falm_reaches_targets_no_later_than_alm(bound_instances):
    for case in bound_instances[:5]:
        f_star = case["oracle_smoothed"].f_star
        config = SolverConfig(mu=smoothed_mu(case), max_iter=5000, obj_target=f_star + TARGET_GAPS[-1])
        alm = run_alm(case["smoothed"], config)
        falm = run_falm(case["smoothed"], config)
        for gap in TARGET_GAPS:
            assert _iterations(falm, f_star + gap) <= _iterations(alm, f_star + gap), (case["seed"], gap)


def test_skip_counts_are_reported(bound_instances):
    case = bound_instances[0]
    trace = run_falm_s(case["exact"], SolverConfig(mu=exact_mu(case), max_iter=300))
    assert trace.skip_count == sum(trace.skip_flags())
    assert np.all(np.diff(trace.regular_counts()) >= 0)
