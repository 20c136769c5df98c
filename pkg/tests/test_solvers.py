import math

import numpy as np
import pytest

from altlin.core.linalg import vector_shrink
from altlin.errors import DivergenceError, SolverMisuseError
from altlin.objective import FunctionHandle, SplitObjective, l1_handle, quadratic_handle, sq_norm, zero_handle
from altlin.oracle import reference_optimum
from altlin.problems.lasso import LassoInstance, lasso_handles, random_lasso
from altlin.solvers import (
    SOLVERS,
    ContinuationConfig,
    SolverConfig,
    continuation_next_mu,
    read_trace_csv,
    run_adal,
    run_alm,
    run_alm_s,
    run_alm_s_equiv,
    run_falm,
    run_falm_s,
    run_fista,
    run_ista,
    run_sadal,
    tk_schedule,
    write_trace_csv,
)
from altlin.solvers.schedule import REGULAR, SKIPPING
from altlin.solvers.trace import TRACE_HEADER, trace_rows
from tests.helpers import assert_non_increasing


def twin_quadratics(c1, c2):
    return SplitObjective(quadratic_handle(c1), quadratic_handle(c2), shape=(len(c1),), name="twin_quadratics")


@pytest.fixture
def tall_lasso():
    # A has full column rank, so f is strongly convex
    return random_lasso(40, 20, 0.1, seed=2)


def test_registry_names():
    assert set(SOLVERS) == {"adal", "sadal", "alm", "alm_s", "alm_s_equiv", "falm", "falm_s", "ista", "fista"}


class TestAdal:
    def test_identical_quadratics(self):
        c = np.array([1.0, -2.0, 0.5])
        trace = run_adal(twin_quadratics(c, c), SolverConfig(mu=1.0, max_iter=200))
        np.testing.assert_allclose(trace.final_x, c, atol=1e-8)
        np.testing.assert_allclose(trace.final_y, c, atol=1e-8)
        assert trace.records[-1].infeas < 1e-8

    def test_first_iteration(self, small_lasso):
        obj = lasso_handles(small_lasso)
        mu = 0.5
        trace = run_adal(obj, SolverConfig(mu=mu, max_iter=1))
        A, b = small_lasso.A, small_lasso.b
        x1 = np.linalg.solve(np.eye(50) + mu * A.T @ A, mu * A.T @ b)
        np.testing.assert_allclose(trace.final_x, x1, atol=1e-12)
        np.testing.assert_allclose(trace.final_y, vector_shrink(x1, mu * 0.1), atol=1e-12)

    def test_lasso_reaches_oracle(self, tall_lasso):
        obj = lasso_handles(tall_lasso)
        f_star = reference_optimum(obj, tol=1e-12).f_star
        trace = run_adal(obj, SolverConfig(mu=1.0, max_iter=5000, obj_target=f_star + 1e-6))
        assert trace.stop_reason == "objective_target"
        assert trace.final_obj >= f_star - 1e-9

    def test_stops_on_infeasibility(self):
        c = np.array([1.0, 2.0])
        trace = run_adal(twin_quadratics(c, -c), SolverConfig(mu=1.0, max_iter=1000, infeas_tol=1e-6))
        assert trace.stop_reason == "infeasibility"
        assert trace.records[-1].infeas < 1e-6
        assert len(trace) < 1000


class TestSadal:
    def test_identical_quadratics(self):
        c = np.array([3.0, 0.0, -1.0])
        trace = run_sadal(twin_quadratics(c, c), SolverConfig(mu=0.5, max_iter=200))
        np.testing.assert_allclose(trace.final_y, c, atol=1e-8)

    def test_lasso_reaches_oracle(self, tall_lasso):
        obj = lasso_handles(tall_lasso)
        f_star = reference_optimum(obj, tol=1e-12).f_star
        trace = run_sadal(obj, SolverConfig(mu=1.0, max_iter=5000, obj_target=f_star + 1e-6))
        assert trace.stop_reason == "objective_target"
        assert trace.final_obj >= f_star - 1e-9


class TestAlm:
    def test_two_quadratics(self):
        c1, c2 = np.array([1.0, 3.0]), np.array([-1.0, 5.0])
        trace = run_alm(twin_quadratics(c1, c2), SolverConfig(mu=1.0, max_iter=100))
        np.testing.assert_allclose(trace.final_y, (c1 + c2) / 2, atol=1e-10)

    def test_starting_at_the_optimum_stays_there(self):
        c1, c2 = np.array([1.0, 3.0]), np.array([-1.0, 5.0])
        mid = (c1 + c2) / 2
        obj = twin_quadratics(c1, c2)
        trace = run_alm(obj, SolverConfig(mu=1.0, max_iter=20, x0=mid))
        np.testing.assert_allclose(trace.objectives(), obj.value(mid), rtol=1e-12)

    def test_monotone_on_smoothed_lasso(self, small_lasso):
        obj = lasso_handles(small_lasso, smoothed_g=1e-2)
        trace = run_alm(obj, SolverConfig(mu="auto", max_iter=300))
        assert_non_increasing(trace.objectives())
        assert_non_increasing([r.obj_x for r in trace.records])

    def test_rejects_nonsmooth_g(self, small_lasso):
        with pytest.raises(SolverMisuseError):
            run_alm(lasso_handles(small_lasso), SolverConfig(mu=0.1))
        with pytest.raises(SolverMisuseError):
            run_falm(lasso_handles(small_lasso), SolverConfig(mu=0.1))


class TestAlmS:
    def test_always_skipping_is_ista(self, small_lasso):
        obj = lasso_handles(small_lasso)
        mu = 1.0 / small_lasso.lipschitz
        skipping = run_alm_s(obj, SolverConfig(mu=mu, max_iter=50, skip_policy="always"))
        ista = run_ista(obj, SolverConfig(mu=mu, max_iter=50))
        assert skipping.skip_count == 50
        np.testing.assert_allclose(skipping.objectives(), ista.objectives(), rtol=0, atol=1e-14)

    def test_monotone(self, small_lasso):
        obj = lasso_handles(small_lasso)
        trace = run_alm_s(obj, SolverConfig(mu=1.0 / small_lasso.lipschitz, max_iter=300))
        assert_non_increasing(trace.objectives())
        assert_non_increasing([r.obj_x for r in trace.records])
        for r in trace.records:
            assert r.obj <= r.obj_x + 1e-12 * (1 + abs(r.obj_x))

    def test_equivalent_form_saves_gradients(self, small_lasso):
        obj = lasso_handles(small_lasso)
        config = SolverConfig(mu=1.0 / small_lasso.lipschitz, max_iter=100)
        plain = run_alm_s(obj, config)
        equiv = run_alm_s_equiv(obj, config)
        assert plain.skip_count < len(plain)
        assert equiv.grad_evals < plain.grad_evals

    def test_first_iteration_by_hand(self):
        A = np.array([[1.0, 0.5], [0.2, 1.0]])
        b = np.array([1.0, -0.5])
        rho = 0.1
        inst = LassoInstance(A=A, b=b, rho=rho)
        obj = lasso_handles(inst)
        mu = 1.0 / inst.lipschitz
        trace = run_alm_s_equiv(obj, SolverConfig(mu=mu, max_iter=1))

        y0 = np.zeros(2)
        x = np.linalg.solve(np.eye(2) + mu * A.T @ A, mu * A.T @ b)
        F_x = 0.5 * np.sum((A @ x - b) ** 2) + rho * np.abs(x).sum()
        L_x = 0.5 * np.sum((A @ x - b) ** 2) + x @ x / (2 * mu)
        skipped = F_x > L_x
        if skipped:
            x = y0
        grad = A.T @ (A @ x - b)
        y = vector_shrink(x - mu * grad, mu * rho)
        assert trace.records[0].skipped == skipped
        np.testing.assert_allclose(trace.final_x, x, atol=1e-12)
        np.testing.assert_allclose(trace.final_y, y, atol=1e-12)


class TestFastMethods:
    def test_falm_weights(self, small_lasso):
        obj = lasso_handles(small_lasso, smoothed_g=1e-2)
        trace = run_falm(obj, SolverConfig(mu="auto", max_iter=3))
        np.testing.assert_allclose([r.t_k for r in trace.records], [1.0, 1.618034, 2.1935271], rtol=1e-6)

    def test_fista_uses_the_same_weights(self, small_lasso):
        smoothed = lasso_handles(small_lasso, smoothed_g=1e-2)
        falm = run_falm(smoothed, SolverConfig(mu="auto", max_iter=25))
        fista = run_fista(lasso_handles(small_lasso), SolverConfig(mu="auto", max_iter=25))
        assert [r.t_k for r in falm.records] == [r.t_k for r in fista.records]

    def test_falm_s_weights_follow_the_skip_pattern(self, small_lasso):
        obj = lasso_handles(small_lasso)
        trace = run_falm_s(obj, SolverConfig(mu=1.0 / small_lasso.lipschitz, max_iter=200))
        kinds = [SKIPPING if s else REGULAR for s in trace.skip_flags()]
        np.testing.assert_allclose([r.t_k for r in trace.records], tk_schedule(kinds), rtol=1e-14)

    @pytest.mark.parametrize("policy", ["always", "never"])
    def test_falm_s_forced_policies(self, small_lasso, policy):
        obj = lasso_handles(small_lasso)
        trace = run_falm_s(obj, SolverConfig(mu=1.0 / small_lasso.lipschitz, max_iter=30, skip_policy=policy))
        assert trace.skip_count == (30 if policy == "always" else 0)
        kinds = [SKIPPING if s else REGULAR for s in trace.skip_flags()]
        np.testing.assert_allclose([r.t_k for r in trace.records], tk_schedule(kinds), rtol=1e-14)

    def test_fista_without_g_is_accelerated_gradient(self):
        c = np.array([2.0, -1.0, 0.5])
        obj = SplitObjective(quadratic_handle(c, weight=3.0), zero_handle(), shape=(3,))
        mu = 0.1
        trace = run_fista(obj, SolverConfig(mu=mu, max_iter=15))

        x_prev = np.zeros(3)
        y = np.zeros(3)
        t = 1.0
        expected = []
        for _ in range(15):
            x = y - mu * 3.0 * (y - c)
            t_next = (1 + math.sqrt(1 + 4 * t * t)) / 2
            y = x + ((t - 1) / t_next) * (x - x_prev)
            x_prev, t = x, t_next
            expected.append(1.5 * np.sum((x - c) ** 2))
        np.testing.assert_allclose(trace.objectives(), expected, rtol=1e-12)


class TestIsta:
    def test_first_step(self, small_lasso):
        obj = lasso_handles(small_lasso)
        mu = 1.0 / small_lasso.lipschitz
        trace = run_ista(obj, SolverConfig(mu=mu, max_iter=1))
        expected = vector_shrink(mu * small_lasso.A.T @ small_lasso.b, mu * 0.1)
        np.testing.assert_allclose(trace.final_x, expected, atol=1e-14)
        assert trace.records[0].infeas is None

    def test_monotone(self, small_lasso):
        obj = lasso_handles(small_lasso)
        trace = run_ista(obj, SolverConfig(mu="auto", max_iter=200))
        assert_non_increasing(trace.objectives())

    def test_objective_target(self, small_lasso):
        obj = lasso_handles(small_lasso)
        target = 0.5 * obj.value(obj.zeros())
        trace = run_ista(obj, SolverConfig(mu="auto", max_iter=1000, obj_target=target))
        assert trace.stop_reason == "objective_target"
        assert trace.final_obj <= target
        assert all(r.obj > target for r in trace.records[:-1])

    def test_needs_smooth_f(self):
        obj = SplitObjective(l1_handle(1.0), l1_handle(1.0), shape=(2,))
        with pytest.raises(SolverMisuseError):
            run_ista(obj, SolverConfig(mu=1.0))

    def test_auto_mu_needs_hints(self):
        obj = SplitObjective(zero_handle(), l1_handle(1.0), shape=(2,))
        with pytest.raises(SolverMisuseError):
            run_ista(obj, SolverConfig())


class TestContinuation:
    def test_next_mu(self):
        cont = ContinuationConfig(mu0=1.0, mu_bar=1e-6, eta=2 / 3)
        assert continuation_next_mu(1.0, cont) == pytest.approx(2 / 3)
        assert continuation_next_mu(1e-6, cont) == 1e-6

    @pytest.mark.parametrize("kwargs", [
        dict(mu0=1.0, mu_bar=1e-6, eta=1.0),
        dict(mu0=1.0, mu_bar=2.0, eta=0.5),
        dict(mu0=-1.0, mu_bar=1e-6, eta=0.5),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ContinuationConfig(**kwargs)

    def test_recorded_mu_sequence(self, small_lasso):
        obj = lasso_handles(small_lasso)
        cont = ContinuationConfig(mu0=0.1, mu_bar=0.01, eta=0.5)
        trace = run_alm_s(obj, SolverConfig(max_iter=6, continuation=cont))
        np.testing.assert_allclose([r.mu for r in trace.records], [0.1, 0.05, 0.025, 0.0125, 0.01, 0.01])


class TestTraces:
    def test_divergence_keeps_partial_trace(self):
        concave = FunctionHandle(
            "concave",
            value=lambda x: -0.5 * sq_norm(x),
            prox=lambda z, tau: z,
            gradient=lambda x: -x,
        )
        obj = SplitObjective(concave, zero_handle(), shape=(3,))
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(DivergenceError) as info:
                run_ista(obj, SolverConfig(mu=1.0, max_iter=2000, x0=np.ones(3)))
        trace = info.value.trace
        assert trace.stop_reason == "diverged"
        assert 0 < len(trace) < 2000
        assert not math.isfinite(trace.records[-1].obj)

    def test_deterministic(self, small_lasso):
        obj = lasso_handles(small_lasso)
        config = SolverConfig(mu=1.0 / small_lasso.lipschitz, max_iter=100)
        first = run_falm_s(obj, config)
        second = run_falm_s(obj, config)
        assert trace_rows(first, include_timing=False) == trace_rows(second, include_timing=False)

    def test_record_iterates(self, small_lasso):
        obj = lasso_handles(small_lasso)
        trace = run_alm_s(obj, SolverConfig(mu="auto", max_iter=7, record_iterates=True))
        assert len(trace.iterates) == 7
        np.testing.assert_array_equal(trace.iterates[-1][1], trace.final_y)

    def test_csv(self, small_lasso, tmp_path):
        obj = lasso_handles(small_lasso)
        ista = run_ista(obj, SolverConfig(mu="auto", max_iter=5))
        fista = run_fista(obj, SolverConfig(mu="auto", max_iter=5))
        alm_s = run_alm_s(obj, SolverConfig(mu="auto", max_iter=5))

        rows = read_trace_csv(write_trace_csv(ista, tmp_path / "ista.csv"))
        assert (tmp_path / "ista.csv").read_text().splitlines()[0] == ",".join(TRACE_HEADER)
        assert [r["iter"] for r in rows] == ["1", "2", "3", "4", "5"]
        assert all(r["infeas"] == "" and r["t_k"] == "" and r["skipped"] == "0" for r in rows)
        assert float(rows[-1]["obj"]) == ista.final_obj

        rows = read_trace_csv(write_trace_csv(fista, tmp_path / "fista.csv"))
        assert float(rows[0]["t_k"]) == 1.0

        rows = read_trace_csv(write_trace_csv(alm_s, tmp_path / "alm_s.csv"))
        assert all(r["infeas"] != "" for r in rows)
        assert [r["skipped"] == "1" for r in rows] == alm_s.skip_flags()

    def test_regular_counts_and_targets(self, small_lasso):
        obj = lasso_handles(small_lasso)
        trace = run_alm_s(obj, SolverConfig(mu="auto", max_iter=40))
        counts = trace.regular_counts()
        assert counts[-1] == len(trace) - trace.skip_count
        target = trace.objectives()[9]
        hit = trace.iterations_to_target(target)
        assert hit is not None and hit <= 10
        assert trace.iterations_to_target(-1.0) is None
