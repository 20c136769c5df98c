"""
Reference computations used to check the solvers: high-accuracy optima,
finite-difference gradients, brute-force scalar prox and complexity bounds.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from altlin.errors import NumericFailureError, SolverMisuseError
from altlin.objective import SplitObjective
from altlin.solvers.schedule import ALPHA
from altlin.solvers.trace import RunTrace

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 1_000_000
BOUND_SLACK = 1e-9
BOUND_KINDS = ("alm", "alm_s", "falm", "falm_s", "ista", "fista")

# certificate is evaluated every this many iterations
CHECK_EVERY = 10

# scalar prox refinement
BRACKET_EXPANSIONS = 60
REFINE_STEPS = 200


@dataclass
class OracleResult:
    f_star: float
    x_star: np.ndarray
    certificate: float
    iterations_used: int
    certified: bool = True


def fixed_point_residual(obj: SplitObjective, x: np.ndarray, mu: float) -> float:
    """``||x - prox_g(x - mu grad f(x), mu)||``"""
    return float(np.linalg.norm(x - obj.g.prox(x - mu * obj.f.gradient(x), mu)))


def reference_optimum(
    obj: SplitObjective,
    tol: float = 1e-10,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: Optional[np.ndarray] = None,
) -> OracleResult:
    """
    FISTA with ``mu = 1/L(f)`` and gradient-based adaptive restart, run until
    the fixed-point residual is at most ``tol``.

    Returns the certified iterate, or the best iterate seen (with
    ``certified=False``) if ``max_iter`` is reached first.
    """
    if not obj.f.smooth:
        raise SolverMisuseError("reference optimum needs a smooth f")
    if obj.f.lipschitz is None:
        raise SolverMisuseError("reference optimum needs a Lipschitz hint on f")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    mu = 1.0 / obj.f.lipschitz
    x = obj.zeros() if x0 is None else np.array(obj.check_point(x0), dtype=np.float64, copy=True)
    y = x.copy()
    t = 1.0
    best_x, best_F = x.copy(), obj.value(x)
    residual = fixed_point_residual(obj, x, mu)
    if residual <= tol:
        return OracleResult(f_star=best_F, x_star=x, certificate=residual, iterations_used=0)

    for it in range(1, max_iter + 1):
        x_new = obj.g.prox(y - mu * obj.f.gradient(y), mu)
        if np.vdot(y - x_new, x_new - x) > 0:
            # momentum points uphill
            t = 1.0
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = x_new + ((t - 1.0) / t_next) * (x_new - x)
        x, t = x_new, t_next

        if it % CHECK_EVERY == 0:
            F = obj.value(x)
            if F < best_F:
                best_x, best_F = x.copy(), F
            residual = fixed_point_residual(obj, x, mu)
            if residual <= tol:
                logger.info("oracle certified after %d iterations (residual %.3g)", it, residual)
                return OracleResult(f_star=obj.value(x), x_star=x.copy(), certificate=residual, iterations_used=it)

    logger.warning("oracle hit the %d iteration cap, residual %.3g > %.3g", max_iter, residual, tol)
    return OracleResult(
        f_star=best_F,
        x_star=best_x,
        certificate=fixed_point_residual(obj, best_x, mu),
        iterations_used=max_iter,
        certified=False,
    )


def finite_diff_grad(fn: Callable[[np.ndarray], float], x, h: float = 1e-6) -> np.ndarray:
    """Central differences per coordinate"""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.array(x, dtype=np.float64, order="C")
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        up = fn(x)
        flat_x[i] = orig - h
        down = fn(x)
        flat_x[i] = orig
        flat_g[i] = (up - down) / (2.0 * h)
    return grad


def scalar_prox_bruteforce(phi: Callable[[float], float], z: float, tau: float, tol: float = 1e-10) -> float:
    """
    Minimize ``tau phi(x) + (x - z)^2 / 2`` for convex ``phi``.

    Golden section gives a first estimate; a bracket around it is then
    narrowed to width ``tol`` using the sign of the model's secant slope,
    which for convex ``phi`` lies between the one-sided derivatives at the
    interval ends. The quadratic part of the slope is taken in closed form,
    so piecewise-linear ``phi`` is located to ``tol``; for curved ``phi`` the
    rounding in ``phi`` differences limits the result to about
    ``sqrt(eps tau |phi|)``.

    Raises:
        NumericFailureError: if no bracket around the minimizer is found
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def model(x):
        return tau * phi(x) + 0.5 * (x - z) ** 2

    def slope(lo, hi):
        return tau * (phi(hi) - phi(lo)) / (hi - lo) + (0.5 * (lo + hi) - z)

    try:
        result = optimize.minimize_scalar(model, bracket=(z - 1.0, z + 1.0), method="golden", options={"xtol": tol})
    except (ValueError, RuntimeError) as exc:
        raise NumericFailureError(f"golden section could not bracket the minimizer near z={z}") from exc
    x0 = float(result.x)

    # widen each side until its secant slope points back at x0
    start = 1e-6 * max(1.0, abs(x0))
    ends = []
    for sign in (-1.0, 1.0):
        step = start
        for _ in range(BRACKET_EXPANSIONS):
            near, far = x0 + sign * step, x0 + 2.0 * sign * step
            if sign * slope(min(near, far), max(near, far)) > 0:
                break
            step *= 2.0
        else:
            raise NumericFailureError(f"could not bracket the minimizer near x={x0}")
        ends.append(far)
    a, b = ends

    for _ in range(REFINE_STEPS):
        if b - a <= tol:
            break
        lo, hi = a + (b - a) / 3.0, b - (b - a) / 3.0
        if not a < lo < hi < b:
            break
        s = slope(lo, hi)
        if s > 0:
            b = hi
        elif s < 0:
            a = lo
        else:
            a, b = lo, hi
    return 0.5 * (a + b)


@dataclass(frozen=True)
class BoundConstants:
    mu: float
    x0_minus_xstar_sq: float
    f_star: float
    slack: float = BOUND_SLACK


@dataclass
class BoundReport:
    kind: str
    passed: bool
    checked: int
    first_violation: Optional[int] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None

    def __str__(self) -> str:
        if self.passed:
            return f"{self.kind} bound holds at all {self.checked} iterations"
        return f"{self.kind} bound violated at k={self.first_violation}: {self.lhs:.6g} > {self.rhs:.6g}"


def bound_rhs(kind: str, k: int, constants: BoundConstants, regular_count: int = 0, first_step_regular: bool = True) -> float:
    """
    Right-hand side of the complexity bound after ``k`` iterations.

    ``regular_count`` is the number of non-skipped iterations among 1..k.
    """
    D, mu = constants.x0_minus_xstar_sq, constants.mu
    if kind == "alm":
        return D / (4.0 * mu * k)
    if kind == "alm_s":
        return D / (2.0 * mu * (k + regular_count))
    if kind == "falm":
        return D / (mu * (k + 1) ** 2)
    if kind == "falm_s":
        r_hat = regular_count + 1 if first_step_regular else regular_count
        return 2.0 * D / (mu * (k + 1 + ALPHA * r_hat) ** 2)
    if kind == "ista":
        return D / (2.0 * mu * k)
    if kind == "fista":
        return 2.0 * D / (mu * (k + 1) ** 2)
    raise ValueError(f"unknown bound kind {kind!r}, expected one of {BOUND_KINDS}")


def check_bound(trace: RunTrace, bound_kind: str, constants: BoundConstants) -> BoundReport:
    """
    Check ``F_k - F* <= rhs(k) + slack`` at every recorded iteration.

    Raises:
        ValueError: for an empty trace, an unknown kind, or a trace whose
            step parameter changed (continuation)
    """
    if bound_kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {bound_kind!r}, expected one of {BOUND_KINDS}")
    if not trace.records:
        raise ValueError(f"{trace.solver_name}: trace has no records")
    mus = {r.mu for r in trace.records if not math.isnan(r.mu)}
    if len(mus) > 1:
        raise ValueError(f"{trace.solver_name}: bounds need a constant mu, trace uses {len(mus)} values")

    regular = trace.regular_counts()
    first_regular = not trace.records[0].skipped
    for i, rec in enumerate(trace.records):
        rhs = bound_rhs(bound_kind, rec.k, constants, int(regular[i]), first_regular)
        lhs = rec.obj - constants.f_star
        if lhs > rhs + constants.slack:
            return BoundReport(bound_kind, False, i + 1, first_violation=rec.k, lhs=lhs, rhs=rhs)
    return BoundReport(bound_kind, True, len(trace.records))
