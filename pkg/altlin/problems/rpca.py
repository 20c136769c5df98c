"""
Robust PCA ``min ||X||_* + rho ||Y||_1  s.t.  X + Y = M`` in smoothed form,
optionally with missing entries (only ``P_mask(Y)`` is penalized and ``M``
is observed on the mask).

The pair solver alternates the two closed-form subproblems of the
alternating linearization method on (X, Y); the accelerated variant
extrapolates the Y-iterates.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from altlin.core.linalg import IndexMask, as_matrix, nuclear_norm, project_mask, spectral_norm
from altlin.errors import ShapeMismatchError
from altlin.objective import (
    SplitObjective,
    l1_handle,
    masked_l1_handle,
    nuclear_handle,
    reflected_handle,
    smoothed_l1_handle,
    smoothed_masked_l1_handle,
    smoothed_nuclear_handle,
)
from altlin.problems.rng import Lcg64
from altlin.smoothing import (
    DEFAULT_SIGMA,
    SmoothedNuclear,
    smoothed_nuclear_grad,
    smoothed_nuclear_prox,
)
from altlin.solvers.config import SolverConfig
from altlin.solvers.schedule import EVENT_REGULAR, TkState, update_tk
from altlin.solvers.trace import RunTrace, TraceRecorder

logger = logging.getLogger(__name__)

MU0_DIVISOR = 1.25


@dataclass(frozen=True, eq=False)
class RpcaInstance:
    M: np.ndarray
    rho: float
    sigma: float = DEFAULT_SIGMA
    mask: Optional[IndexMask] = None

    def __post_init__(self):
        M = as_matrix(self.M)
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.mask is not None:
            if self.mask.shape != M.shape:
                raise ShapeMismatchError(f"mask shape {self.mask.shape} does not match M {M.shape}")
            if np.any(M[~self.mask.observed] != 0):
                raise ValueError("M must be zero off the mask (pass P_mask(M))")
        object.__setattr__(self, "M", M)

    @classmethod
    def observed(cls, M_full, mask: IndexMask, rho: float, sigma: float = DEFAULT_SIGMA) -> "RpcaInstance":
        return cls(M=project_mask(M_full, mask), rho=rho, sigma=sigma, mask=mask)

    @staticmethod
    def default_rho(shape: Tuple[int, int]) -> float:
        return 1.0 / math.sqrt(shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape

    def masked(self, Y: np.ndarray) -> np.ndarray:
        return Y if self.mask is None else project_mask(Y, self.mask)


class RpcaResult(NamedTuple):
    X: np.ndarray
    Y: np.ndarray
    trace: RunTrace


class RelativeErrors(NamedTuple):
    rel_x: float
    rel_y: float
    absolute_x: bool = False
    absolute_y: bool = False


def rpca_handles(inst: RpcaInstance, smooth_f: bool = True, smooth_g: bool = True) -> SplitObjective:
    """
    The problem over X alone: ``f(X)`` is the (smoothed) nuclear norm and
    ``g(X) = h(M - X)`` with ``h`` the (smoothed, masked) l1 term.
    """
    f = smoothed_nuclear_handle(inst.sigma, inst.shape) if smooth_f else nuclear_handle()
    if inst.mask is None:
        size = inst.shape[0] * inst.shape[1]
        h = smoothed_l1_handle(inst.rho, inst.sigma, size) if smooth_g else l1_handle(inst.rho)
    else:
        h = smoothed_masked_l1_handle(inst.rho, inst.sigma, inst.mask) if smooth_g else masked_l1_handle(inst.rho, inst.mask)
    g = reflected_handle(h, inst.M, name="sparse_residual")
    return SplitObjective(f, g, shape=inst.shape, name="rpca")


def _sparse_grad(Y, sigma, rho, mask):
    Yp = Y if mask is None else project_mask(Y, mask)
    return np.clip(Yp / sigma, -rho, rho)


def rpca_x_subproblem(Yk, M, mu: float, sigma: float, rho: float, mask: Optional[IndexMask] = None) -> np.ndarray:
    """
    Minimize ``f_sigma(X) + <grad g_sigma(Y^k), M - X - Y^k> + ||X + Y^k - M||^2 / (2 mu)``.

    Closed form: singular value map ``gamma - mu gamma / max(gamma, mu + sigma)``
    applied to ``mu Z_sigma(Y^k) - Y^k + M``.
    """
    C = mu * _sparse_grad(Yk, sigma, rho, mask) - Yk + M
    return smoothed_nuclear_prox(SmoothedNuclear(sigma, C.shape), C, mu)


def rpca_y_subproblem(Xk1, M, mu: float, sigma: float, rho: float, mask: Optional[IndexMask] = None) -> np.ndarray:
    """
    Minimize ``g_sigma(Y) + <W_sigma(X), M - X - Y> + ||X + Y - M||^2 / (2 mu)``
    entry-wise: ``Y = B - mu clip(P(B) / (sigma + mu), -rho, rho)`` with
    ``B = mu W_sigma(X) - X + M``.
    """
    B = mu * smoothed_nuclear_grad(SmoothedNuclear(sigma, Xk1.shape), Xk1) - Xk1 + M
    Bp = B if mask is None else project_mask(B, mask)
    return np.asfortranarray(B - mu * np.clip(Bp / (sigma + mu), -rho, rho))


def x_subproblem_residual(X, Yk, M, mu, sigma, rho, mask=None) -> float:
    W = smoothed_nuclear_grad(SmoothedNuclear(sigma, X.shape), X)
    return float(np.linalg.norm(W - _sparse_grad(Yk, sigma, rho, mask) + (X + Yk - M) / mu))


def y_subproblem_residual(Y, Xk1, M, mu, sigma, rho, mask=None) -> float:
    W = smoothed_nuclear_grad(SmoothedNuclear(sigma, Xk1.shape), Xk1)
    return float(np.linalg.norm(-W + (Xk1 + Y - M) / mu + _sparse_grad(Y, sigma, rho, mask)))


def default_mu0(M, norm: str = "spectral") -> float:
    """``||M|| / 1.25`` with the spectral or Frobenius norm"""
    if norm == "spectral":
        value = spectral_norm(M)
    elif norm == "fro":
        value = float(np.linalg.norm(M))
    else:
        raise ValueError(f"norm must be 'spectral' or 'fro', got {norm!r}")
    return value / MU0_DIVISOR


def rpca_objective(inst: RpcaInstance, X, Y) -> float:
    """Unsmoothed ``||X||_* + rho ||P(Y)||_1``"""
    return nuclear_norm(X) + inst.rho * float(np.sum(np.abs(inst.masked(Y))))


def run_rpca(
    inst: RpcaInstance,
    config: SolverConfig,
    accelerated: bool = False,
    X0: Optional[np.ndarray] = None,
    Y0: Optional[np.ndarray] = None,
) -> RpcaResult:
    """
    Alternating linearization on the (X, Y) pair starting from (M, 0).

    Records the unsmoothed objective and the relative infeasibility
    ``||X + Y - M||_F / ||M||_F``; ``mu='auto'`` means ``sigma``.
    """
    M = inst.M
    sigma, rho, mask = inst.sigma, inst.rho, inst.mask
    norm_M = max(float(np.linalg.norm(M)), np.finfo(float).tiny)
    X = as_matrix(X0) if X0 is not None else M.copy(order="F")
    Y = as_matrix(Y0) if Y0 is not None else np.zeros_like(M, order="F")
    if X.shape != M.shape or Y.shape != M.shape:
        raise ShapeMismatchError(f"starting point shapes {X.shape}, {Y.shape} do not match M {M.shape}")

    if config.continuation is None and config.mu == "auto":
        mu = sigma
    else:
        mu = config.initial_mu()
    name = "falm" if accelerated else "alm"
    rec = TraceRecorder(name, config, rpca_objective(inst, X, Y))

    Y_prev = Y.copy()
    Z = Y.copy()
    state = TkState()
    for k in range(1, config.max_iter + 1):
        t_k = state.t
        X = rpca_x_subproblem(Z if accelerated else Y, M, mu, sigma, rho, mask)
        Y = rpca_y_subproblem(X, M, mu, sigma, rho, mask)
        rec.count(grad=2, prox=2)
        if accelerated:
            state = update_tk(state, EVENT_REGULAR)
            Z = Y + ((t_k - 1.0) / state.t) * (Y - Y_prev)
            Y_prev = Y

        infeas = float(np.linalg.norm(X + Y - M)) / norm_M
        stop = rec.record(
            k,
            rpca_objective(inst, X, Y),
            mu,
            infeas=infeas,
            t_k=t_k if accelerated else None,
            x=X,
            y=Y,
        )
        if stop:
            break
        mu = config.next_mu(mu)

    trace = rec.finish(X, Y)
    return RpcaResult(X=X, Y=Y, trace=trace)


def relative_errors(X, Y, truth_A, truth_E, mask: Optional[IndexMask] = None) -> RelativeErrors:
    """
    ``relX = ||X - A|| / ||A||`` and ``relY = ||P(Y) - P(E)|| / ||P(E)||``
    (Frobenius). A zero reference norm falls back to the absolute error and
    sets the matching flag.
    """
    X, Y, A, E = (np.asarray(v, dtype=np.float64) for v in (X, Y, truth_A, truth_E))
    if not (X.shape == Y.shape == A.shape == E.shape):
        raise ShapeMismatchError(f"shapes differ: X{X.shape} Y{Y.shape} A{A.shape} E{E.shape}")
    if mask is not None:
        Y, E = project_mask(Y, mask), project_mask(E, mask)

    def rel(diff, ref):
        ref_norm = float(np.linalg.norm(ref))
        err = float(np.linalg.norm(diff))
        return (err, True) if ref_norm == 0.0 else (err / ref_norm, False)

    rel_x, abs_x = rel(X - A, A)
    rel_y, abs_y = rel(Y - E, E)
    return RelativeErrors(rel_x=rel_x, rel_y=rel_y, absolute_x=abs_x, absolute_y=abs_y)


def random_rpca(
    m: int,
    n: int,
    rank: int,
    spr: float,
    seed: int,
    rho: Optional[float] = None,
    sigma: float = DEFAULT_SIGMA,
) -> Tuple[RpcaInstance, np.ndarray, np.ndarray]:
    """
    Fully observed low-rank plus sparse instance.

    Returns:
        (instance, A, E) with A of rank ``rank`` and E with ``round(spr*m*n)``
        nonzeros uniform on [-500, 500]
    """
    if not 0 < rank < min(m, n):
        raise ValueError(f"rank must lie in (0, {min(m, n)}), got {rank}")
    if not 0 <= spr <= 1:
        raise ValueError(f"spr must lie in [0, 1], got {spr}")
    rng = Lcg64(seed)
    A = rng.normal_array((m, rank)) @ rng.normal_array((n, rank)).T
    E = sparse_corruption(rng, (m, n), spr)
    inst = RpcaInstance(M=A + E, rho=rho if rho is not None else RpcaInstance.default_rho((m, n)), sigma=sigma)
    return inst, np.asfortranarray(A), E


def sparse_corruption(rng: Lcg64, shape: Tuple[int, int], spr: float) -> np.ndarray:
    m, n = shape
    E = np.zeros(m * n)
    support = rng.choice(m * n, int(round(spr * m * n)))
    E[support] = rng.uniform_array((support.size,), low=-500.0, high=500.0)
    return np.asfortranarray(E.reshape((m, n), order="F"))
