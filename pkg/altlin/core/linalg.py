"""
Dense containers, a sign-normalized thin SVD and the two shrinkage operators

Vectors are 1-D float64 arrays, matrices are 2-D float64 arrays in column-major
(Fortran) order. Every routine returns fresh arrays and never mutates inputs.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Tuple

import numpy as np
from scipy import linalg as sla

from altlin.errors import NumericFailureError, ShapeMismatchError

logger = logging.getLogger(__name__)

# Entries below this magnitude are treated as zero when fixing singular vector signs
SIGN_PIVOT_TOL = 1e-12


def _check_finite(arr: np.ndarray, what: str):
    if not np.all(np.isfinite(arr)):
        raise NumericFailureError(f"{what} contains non-finite entries")


def as_vector(x) -> np.ndarray:
    """
    Copy ``x`` into a non-empty 1-D float64 vector.

    Raises:
        ShapeMismatchError: if ``x`` is not one-dimensional or is empty
        NumericFailureError: if ``x`` has NaN or infinite entries
    """
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeMismatchError(f"expected a non-empty vector, got shape {arr.shape}")
    _check_finite(arr, "vector")
    return arr


def as_matrix(X) -> np.ndarray:
    """Copy ``X`` into a non-empty 2-D float64 matrix in Fortran order"""
    arr = np.array(X, dtype=np.float64, order="F")
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeMismatchError(f"expected a non-empty matrix, got shape {arr.shape}")
    _check_finite(arr, "matrix")
    return arr


class SvdFactors(NamedTuple):
    """Thin SVD ``A = U diag(s) V^T`` with ``s`` descending"""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.asfortranarray((self.u * self.s) @ self.v.T)

    def rank(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(self.s > tol))


def _normalize_signs(u: np.ndarray, v: np.ndarray):
    # first significant entry of every left singular vector is made non-negative
    for j in range(u.shape[1]):
        col = u[:, j]
        significant = np.flatnonzero(np.abs(col) > SIGN_PIVOT_TOL)
        if significant.size and col[significant[0]] < 0:
            u[:, j] = -col
            v[:, j] = -v[:, j]


def svd(A) -> SvdFactors:
    """
    Thin singular value decomposition with a deterministic sign convention.

    Args:
        A: m x n matrix

    Returns:
        SvdFactors with U (m x k), s (k, descending, non-negative), V (n x k),
        k = min(m, n)

    Raises:
        NumericFailureError: if LAPACK fails with both drivers
    """
    A = as_matrix(A)
    try:
        u, s, vt = sla.svd(A, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        logger.warning("gesdd did not converge on a %dx%d matrix, retrying with gesvd", *A.shape)
        try:
            u, s, vt = sla.svd(A, full_matrices=False, lapack_driver="gesvd", check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericFailureError(f"SVD did not converge on a {A.shape[0]}x{A.shape[1]} matrix") from exc

    u = np.array(u, order="F")
    v = np.array(vt.T, order="F")
    _normalize_signs(u, v)
    return SvdFactors(u=u, s=np.asarray(s, dtype=np.float64), v=v)


def vector_shrink(z, tau: float) -> np.ndarray:
    """
    Entry-wise soft threshold ``sign(z) * max(|z| - tau, 0)``.

    This is the proximal map of ``tau * ||.||_1`` and works on arrays of any
    shape.
    """
    if not tau > 0:
        raise ValueError(f"shrinkage threshold must be positive, got {tau}")
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def matrix_shrink(Z, tau: float) -> np.ndarray:
    """Singular value soft threshold, the proximal map of ``tau * ||.||_*``"""
    if not tau > 0:
        raise ValueError(f"shrinkage threshold must be positive, got {tau}")
    f = svd(Z)
    s = np.maximum(f.s - tau, 0.0)
    return np.asfortranarray((f.u * s) @ f.v.T)


def nuclear_norm(X) -> float:
    return float(np.sum(sla.svdvals(as_matrix(X), check_finite=False)))


def spectral_norm(X) -> float:
    return float(sla.svdvals(as_matrix(X), check_finite=False)[0])


@dataclass(frozen=True, eq=False)
class IndexMask:
    """
    Set of observed (row, col) positions of an m x n matrix.

    Stored as a boolean array so projection is a single ``np.where``.
    """

    observed: np.ndarray

    def __post_init__(self):
        arr = np.array(self.observed, dtype=bool, order="F")
        if arr.ndim != 2 or 0 in arr.shape:
            raise ShapeMismatchError(f"mask must be a non-empty 2-D array, got shape {arr.shape}")
        object.__setattr__(self, "observed", arr)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]], shape: Tuple[int, int]) -> "IndexMask":
        """Build a mask from 0-based (row, col) pairs; rejects duplicates and out-of-range pairs"""
        m, n = shape
        observed = np.zeros((m, n), dtype=bool, order="F")
        for i, j in pairs:
            if not (0 <= i < m and 0 <= j < n):
                raise ShapeMismatchError(f"mask index ({i}, {j}) outside a {m}x{n} matrix")
            if observed[i, j]:
                raise ValueError(f"duplicate mask index ({i}, {j})")
            observed[i, j] = True
        return cls(observed)

    @classmethod
    def full(cls, shape: Tuple[int, int]) -> "IndexMask":
        return cls(np.ones(shape, dtype=bool))

    @classmethod
    def empty(cls, shape: Tuple[int, int]) -> "IndexMask":
        return cls(np.zeros(shape, dtype=bool))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.observed.shape

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.observed))

    def pairs(self) -> List[Tuple[int, int]]:
        """Observed positions in row-major order"""
        rows, cols = np.nonzero(np.ascontiguousarray(self.observed))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.observed, other.observed))

    __hash__ = None


def project_mask(X, mask: IndexMask) -> np.ndarray:
    """Keep the entries of ``X`` on the mask and zero the rest"""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != mask.shape:
        raise ShapeMismatchError(f"mask shape {mask.shape} does not match matrix shape {X.shape}")
    return np.asfortranarray(np.where(mask.observed, X, 0.0))
