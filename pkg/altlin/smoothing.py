"""
Nesterov smoothing of the l1 norm, the masked l1 norm and the nuclear norm

Each smoothed function is the max-form approximation with a (sigma/2)||.||^2
strongly concave regularizer, so its gradient is (1/sigma)-Lipschitz and

    smoothed(x) <= original(x) <= smoothed(x) + sigma * D

with D = n * rho**2 / 2 for l1 and D = min(m, n) / 2 for the nuclear norm.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from altlin.core.linalg import IndexMask, project_mask, svd
from altlin.errors import ShapeMismatchError

DEFAULT_SIGMA = 1e-6


def _positive(name: str, value: float):
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive real, got {value!r}")


@dataclass(frozen=True)
class SmoothedL1:
    """Smoothed ``rho * ||x||_1`` on vectors (or arrays) with ``n`` entries"""

    rho: float
    sigma: float
    n: int

    def __post_init__(self):
        _positive("rho", self.rho)
        _positive("sigma", self.sigma)
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")

    @property
    def prox_diameter(self) -> float:
        return self.n * self.rho ** 2 / 2.0

    def check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.size != self.n:
            raise ShapeMismatchError(f"expected {self.n} entries, got {x.size}")
        return x


@dataclass(frozen=True)
class SmoothedNuclear:
    """Smoothed nuclear norm on m x n matrices"""

    sigma: float
    shape: Tuple[int, int]

    def __post_init__(self):
        _positive("sigma", self.sigma)
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))

    @property
    def prox_diameter(self) -> float:
        return min(self.shape) / 2.0

    def check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape != self.shape:
            raise ShapeMismatchError(f"expected shape {self.shape}, got {X.shape}")
        return X


@dataclass(frozen=True, eq=False)
class SmoothedMaskedL1:
    """Smoothed ``rho * ||P_mask(Y)||_1``"""

    rho: float
    sigma: float
    mask: IndexMask

    def __post_init__(self):
        _positive("rho", self.rho)
        _positive("sigma", self.sigma)

    @property
    def prox_diameter(self) -> float:
        return self.mask.size * self.rho ** 2 / 2.0


# ---------------------------------------------------------------- l1

def smoothed_l1_grad(h: SmoothedL1, x) -> np.ndarray:
    x = h.check(x)
    return np.clip(x / h.sigma, -h.rho, h.rho)


def smoothed_l1_eval(h: SmoothedL1, x) -> float:
    x = h.check(x)
    z = np.clip(x / h.sigma, -h.rho, h.rho)
    return float(np.vdot(x, z) - 0.5 * h.sigma * np.vdot(z, z))


def smoothed_l1_prox(h: SmoothedL1, z, tau: float) -> np.ndarray:
    """Exact minimizer of ``tau * g_sigma(x) + 0.5 * ||x - z||^2``"""
    _positive("tau", tau)
    z = h.check(z)
    return z - tau * np.clip(z / (tau + h.sigma), -h.rho, h.rho)


# ---------------------------------------------------------------- masked l1

def smoothed_masked_l1_grad(h: SmoothedMaskedL1, Y) -> np.ndarray:
    return np.clip(project_mask(Y, h.mask) / h.sigma, -h.rho, h.rho)


def smoothed_masked_l1_eval(h: SmoothedMaskedL1, Y) -> float:
    Yp = project_mask(Y, h.mask)
    z = np.clip(Yp / h.sigma, -h.rho, h.rho)
    return float(np.vdot(Yp, z) - 0.5 * h.sigma * np.vdot(z, z))


def smoothed_masked_l1_prox(h: SmoothedMaskedL1, Z, tau: float) -> np.ndarray:
    """On-mask entries get the smoothed l1 prox, off-mask entries pass through"""
    _positive("tau", tau)
    Z = np.asarray(Z, dtype=np.float64)
    return np.asfortranarray(Z - tau * np.clip(project_mask(Z, h.mask) / (tau + h.sigma), -h.rho, h.rho))


# ---------------------------------------------------------------- nuclear

def smoothed_nuclear_grad(h: SmoothedNuclear, X) -> np.ndarray:
    X = h.check(X)
    f = svd(X / h.sigma)
    return np.asfortranarray((f.u * np.minimum(f.s, 1.0)) @ f.v.T)


def smoothed_nuclear_eval(h: SmoothedNuclear, X) -> float:
    X = h.check(X)
    gamma = svd(X / h.sigma).s
    per_value = np.where(gamma < 1.0, 0.5 * gamma ** 2, gamma - 0.5)
    return float(h.sigma * np.sum(per_value))


def smoothed_nuclear_prox(h: SmoothedNuclear, Z, tau: float) -> np.ndarray:
    """
    Exact minimizer of ``tau * f_sigma(X) + 0.5 * ||X - Z||_F^2``.

    With ``Z = U diag(gamma) V^T`` the minimizer keeps the singular vectors and
    maps each singular value to ``gamma - tau * gamma / max(gamma, tau + sigma)``.
    """
    _positive("tau", tau)
    Z = h.check(Z)
    f = svd(Z)
    s = f.s - tau * f.s / np.maximum(f.s, tau + h.sigma)
    return np.asfortranarray((f.u * s) @ f.v.T)


# ---------------------------------------------------------------- calibration

def smoothing_gap_bound(h) -> float:
    """Largest possible ``original - smoothed`` value, ``sigma * D``"""
    return h.sigma * h.prox_diameter


def sigma_for_epsilon(
    problem_kind: str,
    epsilon: float,
    rho: float,
    n: Optional[int] = None,
    shape: Optional[Tuple[int, int]] = None,
) -> float:
    """
    Smoothing parameter for which an eps/2-optimal point of the smoothed
    problem is eps-optimal for the original one.

    Args:
        problem_kind: "l1-deblur" (needs ``n``) or "rpca" (needs ``shape``)
        epsilon: target accuracy
        rho: l1 weight
    """
    _positive("epsilon", epsilon)
    _positive("rho", rho)
    if problem_kind == "l1-deblur":
        if n is None or n < 1:
            raise ValueError("l1-deblur calibration needs the dimension n")
        return epsilon / (n * rho ** 2)
    if problem_kind == "rpca":
        if shape is None:
            raise ValueError("rpca calibration needs the matrix shape")
        m, n_cols = shape
        if m < 1 or n_cols < 1:
            raise ValueError(f"invalid matrix shape {shape}")
        return epsilon / (2.0 * max(min(m, n_cols), m * n_cols * rho ** 2))
    raise ValueError(f"unknown problem kind {problem_kind!r}, expected 'l1-deblur' or 'rpca'")
