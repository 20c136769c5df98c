"""
Matrix completion with sparse corruption: a rank-r matrix plus large sparse
errors, observed on a random subset of entries.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, Mapping, NamedTuple, Optional

import numpy as np

from altlin.core.linalg import IndexMask
from altlin.problems.rng import Lcg64
from altlin.problems.rpca import RpcaInstance, sparse_corruption
from altlin.smoothing import DEFAULT_SIGMA

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompletionSpec:
    """
    Attributes:
        n: matrix dimension (n x n)
        r: rank of the low-rank part
        spr: fraction of corrupted entries
        sr: fraction of observed entries
        rng_seed: generator seed
    """

    n: int
    r: int
    spr: float
    sr: float
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.r < self.n:
            raise ValueError(f"rank must satisfy 0 < r < n, got r={self.r}, n={self.n}")
        if not 0 <= self.spr <= 1:
            raise ValueError(f"spr must lie in [0, 1], got {self.spr}")
        if not 0 < self.sr <= 1:
            raise ValueError(f"sr must lie in (0, 1], got {self.sr}")

    def to_config(self) -> Dict[str, str]:
        return {key: repr(value) if isinstance(value, float) else str(value) for key, value in asdict(self).items()}

    @classmethod
    def from_config(cls, section: Mapping[str, str]) -> "CompletionSpec":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in section.items():
            key = "rng_seed" if key == "seed" else key
            if key not in types:
                continue
            kwargs[key] = int(raw) if types[key] in (int, "int") else float(raw)
        return cls(**kwargs)


class CompletionProblem(NamedTuple):
    instance: RpcaInstance
    A: np.ndarray
    E: np.ndarray
    spec: CompletionSpec


def generate_completion(spec: CompletionSpec, sigma: float = DEFAULT_SIGMA, rho: Optional[float] = None) -> CompletionProblem:
    """
    Draw ``A = A_L A_R^T`` (standard normal n x r factors, column-major fill),
    ``E`` with ``round(spr n^2)`` entries uniform on [-500, 500] at uniformly
    chosen positions, and ``round(sr n^2)`` observed positions, in that order
    from one generator seeded with ``rng_seed``. ``rho`` defaults to 1/sqrt(n).
    """
    n, r = spec.n, spec.r
    rng = Lcg64(spec.rng_seed)
    A_left = rng.normal_array((n, r))
    A_right = rng.normal_array((n, r))
    A = np.asfortranarray(A_left @ A_right.T)
    E = sparse_corruption(rng, (n, n), spec.spr)

    observed = np.zeros(n * n, dtype=bool)
    observed[rng.choice(n * n, int(round(spec.sr * n * n)))] = True
    mask = IndexMask(observed.reshape((n, n), order="F"))

    inst = RpcaInstance.observed(A + E, mask, rho=rho if rho is not None else 1.0 / math.sqrt(n), sigma=sigma)
    logger.info("completion instance n=%d r=%d spr=%g sr=%g: %d observed, %d corrupted", n, r, spec.spr, spec.sr, mask.size, int(np.count_nonzero(E)))
    return CompletionProblem(instance=inst, A=A, E=E, spec=spec)
