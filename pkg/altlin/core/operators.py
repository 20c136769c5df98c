"""
Structured linear operators on images: orthonormal Haar transform and
circular uniform blur
"""

import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
import pywt
from scipy import ndimage

from altlin.core.linalg import as_matrix
from altlin.errors import ShapeMismatchError

logger = logging.getLogger(__name__)

WAVELET = "haar"
WAVELET_MODE = "periodization"


@lru_cache(maxsize=32)
def _coeff_slices(shape: Tuple[int, int], levels: int):
    coeffs = pywt.wavedec2(np.zeros(shape), WAVELET, mode=WAVELET_MODE, level=levels)
    _, slices = pywt.coeffs_to_array(coeffs)
    return slices


def haar_2d(img, levels: int, direction: str = "forward") -> np.ndarray:
    """
    Multi-level orthonormal 2-D Haar transform packed into one matrix.

    The coarse approximation block sits in the top-left corner followed by
    the detail blocks of each level, as laid out by ``pywt.coeffs_to_array``.

    Args:
        img: m x n matrix, both dimensions divisible by 2**levels
        levels: number of decomposition levels (>= 1)
        direction: "forward" (analysis) or "inverse" (synthesis)

    Returns:
        Coefficient matrix (forward) or image (inverse) of the same shape
    """
    X = as_matrix(img)
    if levels < 1:
        raise ValueError(f"wavelet levels must be >= 1, got {levels}")
    block = 2 ** levels
    if X.shape[0] % block or X.shape[1] % block:
        raise ShapeMismatchError(
            f"image shape {X.shape} is not divisible by 2**{levels} = {block}"
        )

    if direction == "forward":
        coeffs = pywt.wavedec2(X, WAVELET, mode=WAVELET_MODE, level=levels)
        arr, _ = pywt.coeffs_to_array(coeffs)
        return np.asfortranarray(arr)
    if direction == "inverse":
        coeffs = pywt.array_to_coeffs(X, _coeff_slices(X.shape, levels), output_format="wavedec2")
        return np.asfortranarray(pywt.waverec2(coeffs, WAVELET, mode=WAVELET_MODE))
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def uniform_blur_apply(img, kernel_size: int, adjoint: bool = False) -> np.ndarray:
    """
    Convolve with a centered ``kernel_size`` x ``kernel_size`` box kernel
    under periodic boundary conditions.

    The kernel is symmetric, so the adjoint is the same convolution.
    """
    X = as_matrix(img)
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValueError(f"kernel size must be a positive odd integer, got {kernel_size}")
    if kernel_size > min(X.shape):
        raise ShapeMismatchError(f"kernel size {kernel_size} exceeds image shape {X.shape}")
    out = ndimage.uniform_filter(X, size=kernel_size, mode="wrap")
    return np.asfortranarray(out)


def operator_norm_estimate(
    apply: Callable[[np.ndarray], np.ndarray],
    adjoint: Callable[[np.ndarray], np.ndarray],
    shape: Tuple[int, ...],
    iters: int = 100,
    seed: int = 0,
) -> float:
    """
    Power iteration on ``A^T A`` to estimate ``||A||_2``.

    The Rayleigh quotient never exceeds the true norm, so the estimate is a
    lower bound that tightens with ``iters``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iters):
        y = adjoint(apply(x))
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            return 0.0
        estimate = float(np.sqrt(np.vdot(x, y).real))
        x = y / norm_y
    logger.debug("operator norm estimate after %d iterations: %.6g", iters, estimate)
    return estimate
