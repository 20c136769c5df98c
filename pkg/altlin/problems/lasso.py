"""
Lasso / compressed sensing: ``0.5 ||Ax - b||^2 + rho ||x||_1``
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import linalg as sla

from altlin.core.linalg import as_matrix, as_vector, svd
from altlin.errors import ShapeMismatchError
from altlin.objective import FunctionHandle, SplitObjective, l1_handle, smoothed_l1_handle
from altlin.problems.rng import Lcg64

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LassoInstance:
    A: np.ndarray
    b: np.ndarray
    rho: float
    x_true: Optional[np.ndarray] = None
    lipschitz: float = field(init=False)

    def __post_init__(self):
        A = as_matrix(self.A)
        b = as_vector(self.b)
        if A.shape[0] != b.shape[0]:
            raise ShapeMismatchError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        # largest eigenvalue of A^T A
        object.__setattr__(self, "lipschitz", float(svd(A).s[0] ** 2))

    @property
    def n(self) -> int:
        return self.A.shape[1]


def least_squares_handle(A: np.ndarray, b: np.ndarray, lipschitz: float) -> FunctionHandle:
    """``0.5 ||Ax - b||^2`` with its prox solved by a cached Cholesky factorization"""
    AtA = A.T @ A
    Atb = A.T @ b
    eye = np.eye(A.shape[1])

    @lru_cache(maxsize=8)
    def factor(tau: float):
        return sla.cho_factor(eye + tau * AtA)

    def value(x):
        r = A @ x - b
        return 0.5 * float(r @ r)

    return FunctionHandle(
        "least_squares",
        value=value,
        prox=lambda z, tau: sla.cho_solve(factor(float(tau)), z + tau * Atb),
        gradient=lambda x: A.T @ (A @ x - b),
        lipschitz=lipschitz,
    )


def lasso_handles(inst: LassoInstance, smoothed_g: Optional[float] = None) -> SplitObjective:
    """
    Split objective of a lasso instance.

    Args:
        inst: problem data
        smoothed_g: when given, the smoothing parameter sigma of g
    """
    f = least_squares_handle(inst.A, inst.b, inst.lipschitz)
    g = l1_handle(inst.rho) if smoothed_g is None else smoothed_l1_handle(inst.rho, smoothed_g, inst.n)
    return SplitObjective(f, g, shape=(inst.n,), name="lasso" if smoothed_g is None else "smoothed_lasso")


def random_lasso(
    m: int,
    n: int,
    rho: float,
    seed: int,
    sparsity: float = 0.1,
    noise: float = 0.01,
) -> LassoInstance:
    """
    Gaussian sensing matrix with N(0, 1/m) entries, a sparse ground truth
    with ``round(sparsity * n)`` standard normal nonzeros and
    ``b = A x_true + noise * N(0, 1)``.
    """
    if m < 1 or n < 1:
        raise ValueError(f"invalid lasso dimensions m={m}, n={n}")
    rng = Lcg64(seed)
    A = rng.normal_array((m, n), scale=1.0 / np.sqrt(m))
    x_true = np.zeros(n)
    support = rng.choice(n, max(1, int(round(sparsity * n))))
    x_true[support] = rng.normal_array((support.size,))
    b = A @ x_true + rng.normal_array((m,), scale=noise)
    return LassoInstance(A=A, b=b, rho=rho, x_true=x_true)
