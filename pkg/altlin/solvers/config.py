"""
Solver parameters
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from altlin.errors import SolverMisuseError

SKIP_POLICIES = ("test", "always", "never")

# Objective values above this are treated as divergence
DIVERGENCE_LIMIT = 1e300


@dataclass(frozen=True)
class ContinuationConfig:
    """Geometric decrease ``mu_{k+1} = max(mu_bar, eta * mu_k)``"""

    mu0: float
    mu_bar: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu0) and self.mu0 > 0):
            raise ValueError(f"continuation mu0 must be positive, got {self.mu0}")
        if not (math.isfinite(self.mu_bar) and self.mu_bar > 0):
            raise ValueError(f"continuation mu_bar must be positive, got {self.mu_bar}")
        if not 0 < self.eta < 1:
            raise ValueError(f"continuation eta must lie in (0, 1), got {self.eta}")
        if self.mu_bar > self.mu0:
            raise ValueError(f"continuation floor mu_bar={self.mu_bar} exceeds mu0={self.mu0}")


def continuation_next_mu(mu_k: float, cont: ContinuationConfig) -> float:
    if not mu_k > 0:
        raise ValueError(f"mu must be positive, got {mu_k}")
    return max(cont.mu_bar, cont.eta * mu_k)


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """
    Parameters shared by every solver.

    Attributes:
        mu: step/penalty parameter, or "auto" for 1 / max Lipschitz hint
        max_iter: iteration cap
        infeas_tol: stop once the relative infeasibility drops below this (0 disables)
        obj_target: stop once the recorded objective reaches this value
        continuation: optional mu schedule; overrides ``mu`` with ``mu0``
        skip_policy: "test" runs the descent test, "always"/"never" force the outcome
        x0: starting point (zeros when omitted)
        lambda0: starting multiplier (method default when omitted)
        record_iterates: keep copies of every (x, y) pair in the trace
    """

    mu: Union[float, str] = "auto"
    max_iter: int = 1000
    infeas_tol: float = 0.0
    obj_target: Optional[float] = None
    continuation: Optional[ContinuationConfig] = None
    skip_policy: str = "test"
    x0: Optional[np.ndarray] = None
    lambda0: Optional[np.ndarray] = None
    record_iterates: bool = False

    def __post_init__(self):
        if isinstance(self.mu, str):
            if self.mu != "auto":
                raise ValueError(f"mu must be a positive real or 'auto', got {self.mu!r}")
        elif not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not self.infeas_tol >= 0:
            raise ValueError(f"infeas_tol must be non-negative, got {self.infeas_tol}")
        if self.skip_policy not in SKIP_POLICIES:
            raise ValueError(f"skip_policy must be one of {SKIP_POLICIES}, got {self.skip_policy!r}")

    def initial_mu(self, obj=None) -> float:
        if self.continuation is not None:
            return self.continuation.mu0
        if self.mu == "auto":
            if obj is None:
                raise SolverMisuseError("mu='auto' needs an objective with Lipschitz hints")
            return obj.lipschitz_mu()
        return float(self.mu)

    def next_mu(self, mu: float) -> float:
        if self.continuation is None:
            return mu
        return continuation_next_mu(mu, self.continuation)


def start_point(obj, config: SolverConfig) -> np.ndarray:
    if config.x0 is None:
        return obj.zeros()
    return np.array(obj.check_point(config.x0), dtype=np.float64, copy=True)
