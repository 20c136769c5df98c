"""
Plain-text matrix and mask files

Matrix file: first line ``rows cols``, then ``rows * cols`` whitespace
separated reals in row-major order (one row per line when written here).
Mask file: first line ``m n k``, then ``k`` lines ``i j`` with 0-based indices.
"""

from pathlib import Path
from typing import Union

import numpy as np

from altlin.core.linalg import IndexMask, as_matrix
from altlin.errors import ShapeMismatchError
from altlin.utils import format_real

PathLike = Union[str, Path]


def _tokens(path: PathLike):
    return Path(path).read_text().split()


def read_matrix(path: PathLike) -> np.ndarray:
    tokens = _tokens(path)
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ShapeMismatchError(
            f"{path}: header declares {rows}x{cols} = {rows * cols} values, found {len(values)}"
        )
    data = np.array([float(v) for v in values], dtype=np.float64).reshape(rows, cols)
    return as_matrix(data)


def write_matrix(path: PathLike, X) -> None:
    X = as_matrix(X)
    lines = [f"{X.shape[0]} {X.shape[1]}"]
    for row in X:
        lines.append(" ".join(format_real(v) for v in row))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")


def read_mask(path: PathLike) -> IndexMask:
    tokens = _tokens(path)
    if len(tokens) < 3:
        raise ValueError(f"{path}: missing 'm n k' header")
    m, n, k = (int(t) for t in tokens[:3])
    body = tokens[3:]
    if len(body) != 2 * k:
        raise ShapeMismatchError(f"{path}: header declares {k} index pairs, found {len(body) / 2:g}")
    pairs = [(int(body[2 * p]), int(body[2 * p + 1])) for p in range(k)]
    return IndexMask.from_pairs(pairs, (m, n))


def write_mask(path: PathLike, mask: IndexMask) -> None:
    pairs = mask.pairs()
    lines = [f"{mask.shape[0]} {mask.shape[1]} {len(pairs)}"]
    lines.extend(f"{i} {j}" for i, j in pairs)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")
