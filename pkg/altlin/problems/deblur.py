"""
Wavelet-domain image deblurring: ``0.5 ||R W x - b||^2 + rho ||x||_1``

``x`` holds orthonormal Haar coefficients, ``W`` synthesizes the image and
``R`` is a circular uniform blur, so ``A = R W`` has norm at most 1.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from altlin.core.linalg import as_matrix
from altlin.core.operators import haar_2d, uniform_blur_apply
from altlin.errors import NumericFailureError, ShapeMismatchError
from altlin.objective import FunctionHandle, SplitObjective, l1_handle, smoothed_l1_handle
from altlin.problems.rng import Lcg64

logger = logging.getLogger(__name__)

CG_RTOL = 1e-10
CG_MAXITER = 500


@dataclass(frozen=True, eq=False)
class DeblurInstance:
    b: np.ndarray
    kernel_size: int
    wavelet_levels: int
    rho: float
    image: Optional[np.ndarray] = None

    def __post_init__(self):
        b = as_matrix(self.b)
        block = 2 ** self.wavelet_levels
        if self.wavelet_levels < 1 or b.shape[0] % block or b.shape[1] % block:
            raise ShapeMismatchError(f"image shape {b.shape} is not divisible by 2**{self.wavelet_levels}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0 or self.kernel_size > min(b.shape):
            raise ValueError(f"kernel size must be odd and at most {min(b.shape)}, got {self.kernel_size}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.b.shape


class DeblurOperator:
    """``A = blur o inverse Haar`` on coefficient matrices and its adjoint"""

    def __init__(self, inst: DeblurInstance):
        self.kernel_size = inst.kernel_size
        self.levels = inst.wavelet_levels
        self.shape = inst.shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        return uniform_blur_apply(haar_2d(x, self.levels, "inverse"), self.kernel_size)

    def adjoint(self, u: np.ndarray) -> np.ndarray:
        return haar_2d(uniform_blur_apply(u, self.kernel_size, adjoint=True), self.levels, "forward")

    def normal_plus_identity(self, tau: float) -> LinearOperator:
        """``I + tau A^T A`` on flattened coefficients"""
        size = self.shape[0] * self.shape[1]

        def matvec(v):
            X = np.reshape(v, self.shape, order="F")
            out = X + tau * self.adjoint(self.apply(X))
            return np.ravel(out, order="F")

        return LinearOperator((size, size), matvec=matvec, dtype=np.float64)


def deblur_handles(inst: DeblurInstance, smoothed_g: Optional[float] = None) -> SplitObjective:
    op = DeblurOperator(inst)
    b = inst.b
    Atb = op.adjoint(b)

    def value(x):
        r = op.apply(x) - b
        return 0.5 * float(np.vdot(r, r))

    def prox(z, tau):
        rhs = np.ravel(z + tau * Atb, order="F")
        sol, info = cg(
            op.normal_plus_identity(tau),
            rhs,
            x0=np.ravel(z, order="F"),
            rtol=CG_RTOL,
            atol=0.0,
            maxiter=CG_MAXITER,
        )
        if info != 0:
            raise NumericFailureError(f"CG did not converge in {CG_MAXITER} iterations (info={info})")
        return np.asfortranarray(np.reshape(sol, inst.shape, order="F"))

    f = FunctionHandle(
        "blurred_least_squares",
        value=value,
        prox=prox,
        gradient=lambda x: op.adjoint(op.apply(x) - b),
        lipschitz=1.0,
    )
    size = inst.shape[0] * inst.shape[1]
    g = l1_handle(inst.rho) if smoothed_g is None else smoothed_l1_handle(inst.rho, smoothed_g, size)
    return SplitObjective(f, g, shape=inst.shape, name="deblur" if smoothed_g is None else "smoothed_deblur")


def synthetic_image(shape: Tuple[int, int], seed: int, blocks: int = 6) -> np.ndarray:
    """Piecewise-constant test image with values in [0, 1]"""
    m, n = shape
    rng = Lcg64(seed)
    img = np.full((m, n), 0.2)
    for _ in range(blocks):
        r0 = int(rng.uniform() * m)
        c0 = int(rng.uniform() * n)
        h = 1 + int(rng.uniform() * (m // 2))
        w = 1 + int(rng.uniform() * (n // 2))
        img[r0:r0 + h, c0:c0 + w] = rng.uniform()
    return np.asfortranarray(img)


def random_deblur(
    shape: Tuple[int, int] = (32, 32),
    kernel_size: int = 3,
    levels: int = 3,
    rho: float = 1e-3,
    noise: float = 1e-3,
    seed: int = 0,
) -> DeblurInstance:
    """Blur a synthetic image and add Gaussian noise"""
    img = synthetic_image(shape, seed)
    rng = Lcg64(seed + 1)
    b = uniform_blur_apply(img, kernel_size) + rng.normal_array(shape, scale=noise)
    return DeblurInstance(b=b, kernel_size=kernel_size, wavelet_levels=levels, rho=rho, image=img)
