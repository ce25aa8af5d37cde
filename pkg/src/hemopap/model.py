"""The hematopoiesis model with nonlinear harvesting and mixed delays.

    x'(t) = -a(t) x(t) + sum_i b_i(t) f(x(t - tau_i(t))) - H(t, x(t - sigma(t)))

with production flux ``f(u) = u^m / (1 + u^n)``, ``1 < m <= n``, and
harvesting ``H(t, x) = c(t) * shape(x)``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SpecError
from .pap_funcs import ArrayLike, PapFunction

HARVEST_SHAPES = ("rational", "saturating", "none")


# ---------------------------------------------------------------------------
# production flux


def flux(m: float, n: float, u: ArrayLike) -> ArrayLike:
    """Production flux ``u^m / (1 + u^n)``; always in ``[0, 1]`` for ``1 < m <= n``."""
    if isinstance(u, (float, int)):
        if u < 0:
            raise DomainError(f"flux is defined for u >= 0, got {u!r}")
        return u ** (m - n) / (1.0 + u ** (-n)) if u > 1.0 else u**m / (1.0 + u**n)
    ua = np.asarray(u, dtype=float)
    if np.any(ua < 0):
        raise DomainError(f"flux is defined for u >= 0, got {np.min(ua)!r}")
    with np.errstate(divide="ignore", over="ignore"):
        # for u > 1 divide through by u^n so huge arguments do not overflow
        big = ua > 1.0
        ub = np.where(big, ua, 1.0)
        out = np.where(big, ub ** (m - n) / (1.0 + ub ** (-n)), ua**m / (1.0 + np.minimum(ua, 1.0) ** n))
    return float(out) if out.ndim == 0 else out


def flux_derivative(m: float, n: float, u: ArrayLike) -> ArrayLike:
    ua = np.asarray(u, dtype=float)
    if np.any(ua < 0):
        raise DomainError(f"flux is defined for u >= 0, got {np.min(ua)!r}")
    un = ua**n
    out = ua ** (m - 1.0) * (m - (n - m) * un) / (1.0 + un) ** 2
    return float(out) if out.ndim == 0 else out


def flux_argmax(m: float, n: float) -> float:
    """Maximiser ``(m/(n-m))^(1/n)`` of the flux; ``inf`` when ``m == n``."""
    if m == n:
        return math.inf
    return (m / (n - m)) ** (1.0 / n)


def companion_point(m: float, n: float, k: float) -> float:
    """Point on the decreasing branch of the flux with the same value as ``k``.

    Only defined for ``m < n`` and ``0 < k < argmax``.
    """
    if not m < n:
        raise DomainError("companion point needs m < n (the flux is injective when m == n)")
    peak = flux_argmax(m, n)
    if not 0 < k < peak:
        raise DomainError(f"companion point needs 0 < k < {peak!r}, got k = {k!r}")
    target = flux(m, n, k)
    hi = 2.0 * peak
    while flux(m, n, hi) >= target:
        hi *= 2.0
    k_tilde = brentq(lambda u: flux(m, n, u) - target, peak, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(flux(m, n, k_tilde) - target) > 1e-12:
        raise ArithmeticError("companion point did not reach 1e-12")
    return k_tilde


def mean_value_constant(m: float, n: float, k: float, M: float) -> float:
    """Lipschitz factor ``[(n-m)/4 + m/(1+k^n)^2] M^(m-1)`` of the flux on ``[k, M]``."""
    return ((n - m) / 4.0 + m / (1.0 + k**n) ** 2) * M ** (m - 1.0)


# ---------------------------------------------------------------------------
# harvesting


def _rational(x):
    return x / (1.0 + x * x)


def _saturating(x):
    return x / (1.0 + np.abs(x))


@dataclass(frozen=True)
class HarvestSpec:
    c: PapFunction
    shape: str = "rational"

    def __post_init__(self):
        if self.shape not in HARVEST_SHAPES:
            raise SpecError(f"harvest.shape must be one of {HARVEST_SHAPES}, got {self.shape!r}")
        if self.shape != "none" and self.c.bounds()[0] < 0:
            raise SpecError("harvest.c must be non-negative")

    @classmethod
    def none(cls) -> "HarvestSpec":
        return cls(PapFunction.constant(0.0), "none")

    @property
    def active(self) -> bool:
        return self.shape != "none"

    def shape_fn(self, x: ArrayLike) -> ArrayLike:
        if self.shape == "rational":
            return _rational(x)
        if self.shape == "saturating":
            return _saturating(x)
        return 0.0 * np.asarray(x, dtype=float)

    def __call__(self, t: ArrayLike, x: ArrayLike) -> ArrayLike:
        if not self.active:
            return 0.0 * np.asarray(t, dtype=float)
        return self.c(t) * self.shape_fn(np.abs(x))

    @property
    def shape_lipschitz(self) -> float:
        """Global Lipschitz constant of the shape."""
        return 0.0 if self.shape == "none" else 1.0

    @property
    def shape_sup(self) -> float:
        """Supremum of the shape over ``x >= 0``."""
        return {"rational": 0.5, "saturating": 1.0, "none": 0.0}[self.shape]

    def shape_range(self, k: float, M: float) -> tuple[float, float]:
        """Min and max of the shape over ``[k, M]``."""
        if self.shape == "none":
            return (0.0, 0.0)
        if self.shape == "saturating":
            return (_saturating(k), _saturating(M))
        ends = [_rational(k), _rational(M)]
        hi = 0.5 if k <= 1.0 <= M else max(ends)
        return (min(ends), hi)

    def shape_lipschitz_on(self, k: float, M: float) -> float:
        """Max of ``|shape'|`` over ``[k, M]``."""
        if self.shape == "none":
            return 0.0
        if self.shape == "saturating":
            return 1.0 / (1.0 + k) ** 2
        # rational: |(1 - x^2)/(1 + x^2)^2|, extremal at the ends or x = sqrt(3)
        pts = [k, M] + [p for p in (0.0, math.sqrt(3.0)) if k <= p <= M]
        return max(abs((1 - x * x) / (1 + x * x) ** 2) for x in pts)

    def h_range(self, k: float, M: float) -> tuple[float, float]:
        """``(H^-, H^+)``: inf and sup of ``H(t, x)`` over ``t`` real and ``x`` in ``[k, M]``."""
        if self.shape == "none":
            return (0.0, 0.0)
        c_lo, c_hi = self.c.bounds()
        s_lo, s_hi = self.shape_range(k, M)
        return (max(c_lo, 0.0) * s_lo, c_hi * s_hi)

    def lipschitz_required(self, k: float, M: float) -> float:
        """Smallest admissible ``L`` for ``x`` restricted to ``[k, M]``."""
        if self.shape == "none":
            return 0.0
        return self.c.bounds()[1] * self.shape_lipschitz_on(k, M)


# ---------------------------------------------------------------------------
# model instance


@dataclass(frozen=True)
class RangeParams:
    """Permanence box ``[k, M]`` and, when ``m < n``, the companion point."""

    k: float
    M: float
    k_tilde: Optional[float] = None

    def __post_init__(self):
        if not (self.k > 0 and self.M > self.k):
            raise SpecError(f"range needs 0 < k < M, got k = {self.k!r}, M = {self.M!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.k + self.M)


@dataclass(frozen=True)
class ModelSpec:
    m: float
    n: float
    a: PapFunction
    b: tuple[PapFunction, ...]
    tau: tuple[PapFunction, ...]
    sigma: PapFunction = field(default_factory=lambda: PapFunction.constant(0.0))
    harvest: HarvestSpec = field(default_factory=HarvestSpec.none)
    L: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "tau", tuple(self.tau))
        if not 1.0 < self.m <= self.n:
            raise SpecError(f"need 1 < m <= n, got m = {self.m!r}, n = {self.n!r}")
        if len(self.b) != len(self.tau) or not self.b:
            raise SpecError("b and tau must be non-empty and of equal length")
        if not self.a.bounds()[0] > 0:
            raise SpecError("inf a must be positive")
        for name, fs in (("b", self.b), ("tau", self.tau)):
            for i, f in enumerate(fs):
                if f.bounds()[0] < 0:
                    raise SpecError(f"{name}[{i}] must be non-negative")
        if self.sigma.bounds()[0] < 0:
            raise SpecError("sigma must be non-negative")
        if self.L < 0:
            raise SpecError("L must be non-negative")

    @property
    def N(self) -> int:
        return len(self.b)

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


def max_delay(spec: ModelSpec) -> float:
    """Rigorous upper bound ``r`` on every delay."""
    return max([tau.bounds()[1] for tau in spec.tau] + [spec.sigma.bounds()[1]])


def rhs(spec: ModelSpec, t: float, x_now: float, x_delayed: Sequence[float], x_harvest_delayed: float) -> float:
    """Right-hand side of the model at one instant."""
    if x_now < 0 or x_harvest_delayed < 0 or any(u < 0 for u in x_delayed):
        raise DomainError("the model is only defined for non-negative states")
    if len(x_delayed) != spec.N:
        raise ValueError(f"expected {spec.N} delayed states, got {len(x_delayed)}")
    out = -float(spec.a(t)) * x_now
    for bi, u in zip(spec.b, x_delayed):
        out += float(bi(t)) * flux(spec.m, spec.n, u)
    if spec.harvest.active:
        out -= float(spec.harvest(t, x_harvest_delayed))
    return out
