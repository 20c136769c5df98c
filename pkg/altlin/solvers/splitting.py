"""
Alternating direction augmented Lagrangian methods on ``min f(x) + g(y)
s.t. x = y``: the classical one-multiplier-update scheme and the symmetric
variant that updates the multiplier after both subproblems.
"""

import logging
from typing import Optional

import numpy as np

from altlin.objective import SplitObjective
from altlin.solvers.config import SolverConfig, start_point
from altlin.solvers.trace import RunTrace, TraceRecorder, relative_gap

logger = logging.getLogger(__name__)


def default_multiplier(obj: SplitObjective, y0: np.ndarray) -> np.ndarray:
    """``-gamma_g(y0)``, the multiplier that makes the symmetric schemes match linearization"""
    return -obj.g.subgradient(y0)


def initial_multiplier(obj, config, y0, lambda0, fallback_zero: bool) -> np.ndarray:
    lam = lambda0 if lambda0 is not None else config.lambda0
    if lam is not None:
        return np.array(obj.check_point(lam), dtype=np.float64, copy=True)
    if fallback_zero:
        return obj.zeros()
    return default_multiplier(obj, y0)


def run_adal(obj: SplitObjective, config: SolverConfig, lambda0: Optional[np.ndarray] = None) -> RunTrace:
    """
    Alternating direction augmented Lagrangian method.

    Each iteration minimizes the augmented Lagrangian in x, then in y, then
    takes one multiplier step ``lambda -= (x - y) / mu``. The multiplier
    starts at 0 unless given.
    """
    y = start_point(obj, config)
    x = y.copy()
    lam = initial_multiplier(obj, config, y, lambda0, fallback_zero=True)
    mu = config.initial_mu(obj)
    rec = TraceRecorder("adal", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = obj.f.prox(y + mu * lam, mu)
        y = obj.g.prox(x - mu * lam, mu)
        lam = lam - (x - y) / mu
        rec.count(prox=2)
        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), obj_x=obj.value(x), x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)


def run_sadal(obj: SplitObjective, config: SolverConfig, lambda0: Optional[np.ndarray] = None) -> RunTrace:
    """
    Symmetric ADAL: the multiplier is updated after the x-step and again
    after the y-step. Starting from ``lambda0 = -grad g(y0)`` it reproduces
    the alternating linearization iterates on smooth problems.
    """
    y = start_point(obj, config)
    x = y.copy()
    lam = initial_multiplier(obj, config, y, lambda0, fallback_zero=False)
    mu = config.initial_mu(obj)
    rec = TraceRecorder("sadal", config, obj.value(y))

    for k in range(1, config.max_iter + 1):
        x = obj.f.prox(y + mu * lam, mu)
        lam_half = lam - (x - y) / mu
        y = obj.g.prox(x - mu * lam_half, mu)
        lam = lam_half - (x - y) / mu
        rec.count(prox=2)
        if rec.record(k, obj.value(y), mu, infeas=relative_gap(x, y), obj_x=obj.value(x), x=x, y=y):
            break
        mu = config.next_mu(mu)

    return rec.finish(x, y)
