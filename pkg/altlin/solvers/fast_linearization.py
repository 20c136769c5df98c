"""
Accelerated alternating linearization with Nesterov extrapolation of the
y-iterates, with and without skipping steps.
"""

import logging

import numpy as np

from altlin.objective import SplitObjective, eval_aug_lagrangian, prox_step
from altlin.solvers.config import SolverConfig, start_point
from altlin.solvers.linearization import require_smooth, should_skip
from altlin.solvers.schedule import (
    EVENT_REGULAR,
    TkState,
    correct_tk_for_skip,
    skip_event,
    update_tk,
)
from altlin.solvers.trace import RunTrace, TraceRecorder, relative_gap

logger = logging.getLogger(__name__)


def extrapolate(y: np.ndarray, y_prev: np.ndarray, t: float, t_next: float) -> np.ndarray:
    return y + ((t - 1.0) / t_next) * (y - y_prev)


def run_falm(obj: SplitObjective, config: SolverConfig) -> RunTrace:
    """
    Fast alternating linearization for smooth f and g.

    ``x = argmin Q_g(., z)``, ``y = argmin Q_f(., x)`` and
    ``z = y + ((t_k - 1) / t_{k+1}) (y - y_prev)`` with ``t_1 = 1``.
    """
    require_smooth(obj, "falm", "f", "g")
    y = start_point(obj, config)
    x = y.copy()
    y_prev = y.copy()
    z = y.copy()
    state = TkState()
    mu = config.initial_mu(obj)
    rec = TraceRecorder("falm", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        t_k = state.t
        x = prox_step(obj, "f", z, mu)
        y = prox_step(obj, "g", x, mu)
        rec.count(grad=2, prox=2)
        state = update_tk(state, EVENT_REGULAR)
        z = extrapolate(y, y_prev, t_k, state.t)
        y_prev = y

        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), t_k=t_k, obj_x=obj.value(x), x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)


def run_falm_s(obj: SplitObjective, config: SolverConfig, lambda0=None) -> RunTrace:
    """
    Fast alternating linearization with skipping steps; g may be nonsmooth.

    The multiplier at every extrapolated point is ``-gamma_g(z)`` (the
    minimal-norm subgradient for nonsmooth g) unless ``lambda0`` seeds the
    first one. On a skip at step k > 1 the weight ``t_k`` and the point
    ``z^k`` are rebuilt from step k-1 before ``x^k = z^k``.
    """
    require_smooth(obj, "falm_s", "f")
    y = start_point(obj, config)
    x = y.copy()
    y_prev = y.copy()        # y^{k-1}
    y_prev2 = y.copy()       # y^{k-2}
    z = y.copy()
    seed = lambda0 if lambda0 is not None else config.lambda0
    lam = np.array(obj.check_point(seed), copy=True) if seed is not None else -obj.g.subgradient(z)
    state = TkState()
    mu = config.initial_mu(obj)
    rec = TraceRecorder("falm_s", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = obj.f.prox(z + mu * lam, mu)
        rec.count(prox=1)
        skipped = should_skip(config.skip_policy, obj.value(x), eval_aug_lagrangian(obj, x, z, lam, mu))
        if skipped:
            if state.t_prev is not None:
                # rebuild t_k and z^k from step k-1
                state = correct_tk_for_skip(state)
                z = extrapolate(y_prev, y_prev2, state.t_prev, state.t)
            x = z
            event = skip_event(state)
        else:
            event = EVENT_REGULAR
        t_k = state.t

        grad_fx = obj.f.gradient(x)
        y = obj.g.prox(x - mu * grad_fx, mu)
        rec.count(grad=1, prox=1)

        state = update_tk(state, event)
        y_prev2, y_prev = y_prev, y
        z = extrapolate(y, y_prev2, t_k, state.t)
        lam = -obj.g.subgradient(z)

        stop = rec.record(
            k, obj.value(y), mu, infeas=relative_gap(x, y), skipped=skipped, t_k=t_k, obj_x=obj.value(x), x=x, y=y
        )
        if stop:
            break
        mu = config.next_mu(mu)

    logger.debug("falm_s skip pattern: %s", "".join("S" if s else "R" for s in rec.trace.skip_flags()))
    return rec.finish(x, y)
