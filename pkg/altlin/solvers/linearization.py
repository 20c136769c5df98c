"""
Alternating linearization: each half-step keeps one function exact and
replaces the other by its linearization plus a proximal term.

The skipping variants keep only the linearization of f when the exact
x-step fails its descent test and fall back to a proximal gradient step.
"""

import logging

import numpy as np

from altlin.errors import SolverMisuseError
from altlin.objective import SplitObjective, eval_aug_lagrangian, prox_step
from altlin.solvers.config import SolverConfig, start_point
from altlin.solvers.splitting import initial_multiplier
from altlin.solvers.trace import RunTrace, TraceRecorder, relative_gap

logger = logging.getLogger(__name__)


def require_smooth(obj: SplitObjective, method: str, *sides: str):
    for side in sides:
        handle = obj.side(side)
        if not handle.smooth:
            raise SolverMisuseError(f"{method} needs a smooth {side}, got {handle!r}")


def should_skip(policy: str, obj_at_x: float, lagrangian_at_x: float) -> bool:
    """Skip when ``F(x) > L_mu(x, y; lambda)`` (strict), unless forced by policy"""
    if policy == "always":
        return True
    if policy == "never":
        return False
    return obj_at_x > lagrangian_at_x


def run_alm(obj: SplitObjective, config: SolverConfig) -> RunTrace:
    """
    Alternating linearization method for smooth f and g.

    ``x = argmin Q_g(., y)`` then ``y = argmin Q_f(., x)``. With
    ``mu <= min(1/L(f), 1/L(g))`` both F(x^k) and F(y^k) are non-increasing.
    """
    require_smooth(obj, "alm", "f", "g")
    y = start_point(obj, config)
    x = y.copy()
    mu = config.initial_mu(obj)
    rec = TraceRecorder("alm", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = prox_step(obj, "f", y, mu)
        y = prox_step(obj, "g", x, mu)
        rec.count(grad=2, prox=2)
        F_x = obj.value(x)
        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), obj_x=F_x, x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)


def run_alm_s(obj: SplitObjective, config: SolverConfig, lambda0=None) -> RunTrace:
    """
    Alternating linearization with skipping steps; g may be nonsmooth.

    The x-step minimizes the augmented Lagrangian (``prox_f(y + mu*lambda)``);
    if it fails the descent test the step is skipped (``x = y``). The y-step
    always linearizes f at x and the multiplier becomes
    ``grad f(x) - (x - y) / mu``.
    """
    require_smooth(obj, "alm_s", "f")
    y = start_point(obj, config)
    x = y.copy()
    lam = initial_multiplier(obj, config, y, lambda0, fallback_zero=False)
    mu = config.initial_mu(obj)
    rec = TraceRecorder("alm_s", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = obj.f.prox(y + mu * lam, mu)
        rec.count(prox=1)
        F_x = obj.value(x)
        skipped = should_skip(config.skip_policy, F_x, eval_aug_lagrangian(obj, x, y, lam, mu))
        if skipped:
            x = y
            F_x = obj.value(x)

        grad_fx = obj.f.gradient(x)
        y = obj.g.prox(x - mu * grad_fx, mu)
        lam = grad_fx - (x - y) / mu
        rec.count(grad=1, prox=1)

        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), skipped=skipped, obj_x=F_x, x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)


def run_alm_s_equiv(obj: SplitObjective, config: SolverConfig, lambda0=None) -> RunTrace:
    """
    Same iterates as :func:`run_alm_s`, but regular steps reuse the half
    multiplier ``lambda - (x - y) / mu`` (which equals ``grad f(x)``) instead
    of evaluating the gradient.
    """
    require_smooth(obj, "alm_s_equiv", "f")
    y = start_point(obj, config)
    x = y.copy()
    lam = initial_multiplier(obj, config, y, lambda0, fallback_zero=False)
    mu = config.initial_mu(obj)
    rec = TraceRecorder("alm_s_equiv", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = obj.f.prox(y + mu * lam, mu)
        rec.count(prox=1)
        F_x = obj.value(x)
        skipped = should_skip(config.skip_policy, F_x, eval_aug_lagrangian(obj, x, y, lam, mu))
        if skipped:
            x = y
            F_x = obj.value(x)
            lam_half = obj.f.gradient(x)
            rec.count(grad=1)
        else:
            lam_half = lam - (x - y) / mu

        y = obj.g.prox(x - mu * lam_half, mu)
        lam = lam_half - (x - y) / mu
        rec.count(prox=1)

        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), skipped=skipped, obj_x=F_x, x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)
