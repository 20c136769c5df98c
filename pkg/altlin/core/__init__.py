"""
Dense linear algebra, structured operators and matrix text I/O
"""

from altlin.core.linalg import (
    IndexMask,
    SvdFactors,
    as_matrix,
    as_vector,
    matrix_shrink,
    nuclear_norm,
    project_mask,
    spectral_norm,
    svd,
    vector_shrink,
)

__all__ = [
    "IndexMask",
    "SvdFactors",
    "as_matrix",
    "as_vector",
    "matrix_shrink",
    "nuclear_norm",
    "project_mask",
    "spectral_norm",
    "svd",
    "vector_shrink",
]
