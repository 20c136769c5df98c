"""
Proximal gradient baselines: ISTA and its accelerated form FISTA
"""

import logging

from altlin.objective import SplitObjective, prox_step
from altlin.solvers.config import SolverConfig, start_point
from altlin.solvers.fast_linearization import extrapolate
from altlin.solvers.linearization import require_smooth
from altlin.solvers.schedule import EVENT_REGULAR, TkState, update_tk
from altlin.solvers.trace import RunTrace, TraceRecorder

logger = logging.getLogger(__name__)


def run_ista(obj: SplitObjective, config: SolverConfig) -> RunTrace:
    """``x = prox_g(x - mu grad f(x), mu)``; records F(x^k), no infeasibility"""
    require_smooth(obj, "ista", "f")
    x = start_point(obj, config)
    mu = config.initial_mu(obj)
    rec = TraceRecorder("ista", config, obj.value(x))

    for k in range(1, config.max_iter + 1):
        x = prox_step(obj, "g", x, mu)
        rec.count(grad=1, prox=1)
        if rec.record(k, obj.value(x), mu, x=x, y=x):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, x)


def run_fista(obj: SplitObjective, config: SolverConfig) -> RunTrace:
    """ISTA step taken from the extrapolated point, ``t_1 = 1`` and ``y^1 = x^0``"""
    require_smooth(obj, "fista", "f")
    x = start_point(obj, config)
    x_prev = x.copy()
    y = x.copy()
    state = TkState()
    mu = config.initial_mu(obj)
    rec = TraceRecorder("fista", config, obj.value(x))

    for k in range(1, config.max_iter + 1):
        t_k = state.t
        x = prox_step(obj, "g", y, mu)
        rec.count(grad=1, prox=1)
        state = update_tk(state, EVENT_REGULAR)
        y = extrapolate(x, x_prev, t_k, state.t)
        x_prev = x
        if rec.record(k, obj.value(x), mu, t_k=t_k, x=x, y=x):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, x)
