"""
Two-function splitting framework: function handles, the linearized models,
the augmented Lagrangian and the prox-step map shared by all solvers.

Points are float64 arrays (vectors or matrices); inner products are taken
over the flattened arrays.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from altlin.core.linalg import (
    IndexMask,
    matrix_shrink,
    nuclear_norm,
    project_mask,
    svd,
    vector_shrink,
)
from altlin.errors import NumericFailureError, ShapeMismatchError, SolverMisuseError
from altlin.smoothing import (
    SmoothedL1,
    SmoothedMaskedL1,
    SmoothedNuclear,
    smoothed_l1_eval,
    smoothed_l1_grad,
    smoothed_l1_prox,
    smoothed_masked_l1_eval,
    smoothed_masked_l1_grad,
    smoothed_masked_l1_prox,
    smoothed_nuclear_eval,
    smoothed_nuclear_grad,
    smoothed_nuclear_prox,
)

logger = logging.getLogger(__name__)

Point = np.ndarray
ValueFn = Callable[[Point], float]
MapFn = Callable[[Point], Point]
ProxFn = Callable[[Point, float], Point]


def inner(a: Point, b: Point) -> float:
    return float(np.vdot(a, b))


def sq_norm(a: Point) -> float:
    return float(np.vdot(a, a))


class FunctionHandle:
    """
    A closed proper convex function given by its value, its proximal map
    and, when smooth, its gradient.

    Nonsmooth handles may designate a subgradient selection (used where an
    algorithm linearizes them) and a ``subdiff_distance(x, g)`` that returns
    the distance from ``g`` to the subdifferential at ``x``.
    """

    def __init__(
        self,
        name: str,
        value: ValueFn,
        prox: ProxFn,
        gradient: Optional[MapFn] = None,
        subgradient: Optional[MapFn] = None,
        lipschitz: Optional[float] = None,
        subdiff_distance: Optional[Callable[[Point, Point], float]] = None,
    ):
        if lipschitz is not None and not lipschitz > 0:
            raise ValueError(f"lipschitz hint must be positive, got {lipschitz}")
        self.name = name
        self._value = value
        self._prox = prox
        self._gradient = gradient
        self._subgradient = subgradient
        self._subdiff_distance = subdiff_distance
        self.lipschitz = lipschitz

    def __repr__(self) -> str:
        kind = "smooth" if self.smooth else "nonsmooth"
        return f"FunctionHandle({self.name!r}, {kind}, lipschitz={self.lipschitz})"

    @property
    def smooth(self) -> bool:
        return self._gradient is not None

    @property
    def has_subgradient(self) -> bool:
        return self.smooth or self._subgradient is not None

    def value(self, x: Point) -> float:
        return float(self._value(x))

    def gradient(self, x: Point) -> Point:
        if self._gradient is None:
            raise SolverMisuseError(f"{self.name} is nonsmooth and has no gradient")
        return self._gradient(x)

    def subgradient(self, x: Point) -> Point:
        if self._gradient is not None:
            return self._gradient(x)
        if self._subgradient is None:
            raise SolverMisuseError(f"{self.name} is nonsmooth and has no designated subgradient")
        return self._subgradient(x)

    def prox(self, z: Point, tau: float) -> Point:
        if not tau > 0:
            raise ValueError(f"prox parameter must be positive, got {tau}")
        return self._prox(z, tau)

    def subdiff_distance(self, x: Point, g: Point) -> float:
        if self._gradient is not None:
            return float(np.linalg.norm(self._gradient(x) - g))
        if self._subdiff_distance is None:
            raise SolverMisuseError(f"{self.name} does not expose its subdifferential")
        return float(self._subdiff_distance(x, g))


class SplitObjective:
    """``F(x) = f(x) + g(x)`` over points of a fixed shape"""

    def __init__(self, f: FunctionHandle, g: FunctionHandle, shape: Tuple[int, ...], name: str = "objective"):
        self.f = f
        self.g = g
        self.shape = tuple(shape)
        self.name = name

    def __repr__(self) -> str:
        return f"SplitObjective({self.name!r}, f={self.f.name}, g={self.g.name}, shape={self.shape})"

    def side(self, which: str) -> FunctionHandle:
        if which == "f":
            return self.f
        if which == "g":
            return self.g
        raise ValueError(f"side must be 'f' or 'g', got {which!r}")

    def other(self, which: str) -> FunctionHandle:
        return self.g if which == "f" else self.f

    def check_point(self, x: Point) -> Point:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.shape:
            raise ShapeMismatchError(f"{self.name}: point shape {x.shape} does not match {self.shape}")
        return x

    def zeros(self) -> Point:
        return np.zeros(self.shape)

    def value(self, x: Point) -> float:
        return eval_F(self, x)

    def lipschitz_mu(self) -> float:
        """``1 / max`` of the available Lipschitz hints"""
        hints = [h.lipschitz for h in (self.f, self.g) if h.smooth and h.lipschitz is not None]
        if not hints:
            raise SolverMisuseError(f"{self.name}: no Lipschitz hint available, set mu explicitly")
        return 1.0 / max(hints)


def eval_F(obj: SplitObjective, x: Point) -> float:
    x = obj.check_point(x)
    if not np.all(np.isfinite(x)):
        raise NumericFailureError(f"{obj.name}: point has non-finite entries")
    return obj.f.value(x) + obj.g.value(x)


def eval_Q(obj: SplitObjective, linearized: str, u: Point, v: Point, mu: float) -> float:
    """
    Model of F with ``linearized`` replaced by its linearization at ``v``
    plus the proximal term ``||u - v||^2 / (2 mu)``. ``mu`` may be ``inf``.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    lin = obj.side(linearized)
    kept = obj.other(linearized)
    gamma = lin.subgradient(v)
    d = u - v
    penalty = 0.0 if np.isinf(mu) else sq_norm(d) / (2.0 * mu)
    return kept.value(u) + lin.value(v) + inner(gamma, d) + penalty


def eval_aug_lagrangian(obj: SplitObjective, x: Point, y: Point, lam: Point, mu: float) -> float:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    d = x - y
    return obj.f.value(x) + obj.g.value(y) - inner(lam, d) + sq_norm(d) / (2.0 * mu)


def prox_step(
    obj: SplitObjective,
    keep: str,
    v: Point,
    mu: float,
    subgrad_override: Optional[Point] = None,
) -> Point:
    """
    Minimize the model that keeps ``keep`` and linearizes the other side at ``v``.

    Equals ``prox_keep(v - mu * gamma, mu)`` with ``gamma`` the gradient (or
    the supplied subgradient) of the linearized side at ``v``.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    kept = obj.side(keep)
    gamma = subgrad_override if subgrad_override is not None else obj.other(keep).subgradient(v)
    return kept.prox(v - mu * gamma, mu)


def stationarity_residual(
    obj: SplitObjective,
    keep: str,
    v: Point,
    p: Point,
    mu: float,
    subgrad_override: Optional[Point] = None,
) -> float:
    """
    Distance of ``0`` from ``d keep(p) + gamma + (p - v) / mu``, the optimality
    condition of a prox step from ``v``.
    """
    kept = obj.side(keep)
    gamma = subgrad_override if subgrad_override is not None else obj.other(keep).subgradient(v)
    return kept.subdiff_distance(p, -gamma - (p - v) / mu)


# ---------------------------------------------------------------- handle factories

def zero_handle() -> FunctionHandle:
    return FunctionHandle(
        "zero",
        value=lambda x: 0.0,
        prox=lambda z, tau: np.array(z, dtype=np.float64),
        gradient=lambda x: np.zeros_like(x, dtype=np.float64),
        lipschitz=None,
    )


def quadratic_handle(c: Point, weight: float = 1.0) -> FunctionHandle:
    """``weight/2 * ||x - c||^2``"""
    c = np.array(c, dtype=np.float64)
    return FunctionHandle(
        "quadratic",
        value=lambda x: 0.5 * weight * sq_norm(x - c),
        prox=lambda z, tau: (z + tau * weight * c) / (1.0 + tau * weight),
        gradient=lambda x: weight * (x - c),
        lipschitz=weight,
    )


def _l1_subdiff_distance(rho: float):
    def distance(x: Point, g: Point) -> float:
        on = x != 0
        gap = np.where(on, np.abs(g - rho * np.sign(x)), np.maximum(np.abs(g) - rho, 0.0))
        return float(np.linalg.norm(gap))
    return distance


def l1_handle(rho: float) -> FunctionHandle:
    """``rho * ||x||_1`` with the minimal-norm subgradient ``rho * sign(x)``"""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return FunctionHandle(
        "l1",
        value=lambda x: rho * float(np.sum(np.abs(x))),
        prox=lambda z, tau: vector_shrink(z, tau * rho),
        subgradient=lambda x: rho * np.sign(x),
        subdiff_distance=_l1_subdiff_distance(rho),
    )


def masked_l1_handle(rho: float, mask: IndexMask) -> FunctionHandle:
    """``rho * ||P_mask(Y)||_1``; unobserved entries are free"""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    on_mask = _l1_subdiff_distance(rho)

    def prox(Z, tau):
        shrunk = vector_shrink(Z, tau * rho)
        return np.asfortranarray(np.where(mask.observed, shrunk, Z))

    def distance(Y, G):
        off = np.where(mask.observed, 0.0, G)
        return float(np.hypot(on_mask(project_mask(Y, mask), project_mask(G, mask)), np.linalg.norm(off)))

    return FunctionHandle(
        "masked_l1",
        value=lambda Y: rho * float(np.sum(np.abs(project_mask(Y, mask)))),
        prox=prox,
        subgradient=lambda Y: rho * np.sign(project_mask(Y, mask)),
        subdiff_distance=distance,
    )


def smoothed_l1_handle(rho: float, sigma: float, n: int) -> FunctionHandle:
    h = SmoothedL1(rho=rho, sigma=sigma, n=n)
    return FunctionHandle(
        "smoothed_l1",
        value=lambda x: smoothed_l1_eval(h, x),
        prox=lambda z, tau: smoothed_l1_prox(h, z, tau),
        gradient=lambda x: smoothed_l1_grad(h, x),
        lipschitz=1.0 / sigma,
    )


def smoothed_masked_l1_handle(rho: float, sigma: float, mask: IndexMask) -> FunctionHandle:
    h = SmoothedMaskedL1(rho=rho, sigma=sigma, mask=mask)
    return FunctionHandle(
        "smoothed_masked_l1",
        value=lambda Y: smoothed_masked_l1_eval(h, Y),
        prox=lambda Z, tau: smoothed_masked_l1_prox(h, Z, tau),
        gradient=lambda Y: smoothed_masked_l1_grad(h, Y),
        lipschitz=1.0 / sigma,
    )


def nuclear_handle() -> FunctionHandle:
    """Nuclear norm; the subgradient is ``U_r V_r^T`` over the nonzero singular values"""

    def subgradient(X):
        f = svd(X)
        keep = f.s > 1e-12 * max(1.0, f.s[0])
        return np.asfortranarray(f.u[:, keep] @ f.v[:, keep].T)

    return FunctionHandle(
        "nuclear",
        value=nuclear_norm,
        prox=matrix_shrink,
        subgradient=subgradient,
    )


def smoothed_nuclear_handle(sigma: float, shape: Tuple[int, int]) -> FunctionHandle:
    h = SmoothedNuclear(sigma=sigma, shape=shape)
    return FunctionHandle(
        "smoothed_nuclear",
        value=lambda X: smoothed_nuclear_eval(h, X),
        prox=lambda Z, tau: smoothed_nuclear_prox(h, Z, tau),
        gradient=lambda X: smoothed_nuclear_grad(h, X),
        lipschitz=1.0 / sigma,
    )


def reflected_handle(h: FunctionHandle, M: Point, name: Optional[str] = None) -> FunctionHandle:
    """
    ``phi(X) = h(M - X)``, used to fold the constraint ``X + Y = M`` into a
    function of ``X`` alone.
    """
    M = np.array(M, dtype=np.float64)
    gradient = (lambda X: -h.gradient(M - X)) if h.smooth else None
    subgradient = None if h.smooth else (lambda X: -h.subgradient(M - X))
    return FunctionHandle(
        name or f"{h.name}(M - X)",
        value=lambda X: h.value(M - X),
        prox=lambda Z, tau: M - h.prox(M - Z, tau),
        gradient=gradient,
        subgradient=subgradient,
        lipschitz=h.lipschitz,
        subdiff_distance=lambda X, G: h.subdiff_distance(M - X, -G),
    )
