"""Certification of the sufficient conditions and the exponential rate constants.

All constants come from the rigorous interval bounds of the coefficients and
are used in the unfavourable direction, so a passing verdict is sound even
when the enclosures are loose.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from scipy.optimize import brentq

from .errors import ConditionNotSatisfied
from .model import ModelSpec, RangeParams, companion_point, flux, flux_argmax, max_delay, mean_value_constant

RATE_KINDS = ("extinction_G", "contraction_gamma", "stability_Delta")


@dataclass(frozen=True)
class HypothesisReport:
    h1_pass: bool
    h2_value: float
    h3_value: float
    h4_value: float
    extinction_pass: bool
    a_minus: float
    a_plus: float
    b_minus: tuple[float, ...]
    b_plus: tuple[float, ...]
    H_minus: float
    H_plus: float
    H_plus_computed: float
    r: float
    L: float
    L_required: float
    lipschitz_pass: bool
    flux_factor: float
    argmax: Optional[float] = None
    k_tilde: Optional[float] = None
    h1_reason: str = ""

    @property
    def h2_pass(self) -> bool:
        return self.h2_value < 0

    @property
    def h3_pass(self) -> bool:
        return self.h3_value > 0

    @property
    def h4_pass(self) -> bool:
        return self.h4_value < 0

    @property
    def all_pass(self) -> bool:
        return self.h1_pass and self.h2_pass and self.h3_pass and self.h4_pass and self.lipschitz_pass

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(h2_pass=self.h2_pass, h3_pass=self.h3_pass, h4_pass=self.h4_pass, all_pass=self.all_pass)
        return d


@dataclass(frozen=True)
class RateCertificate:
    kind: str
    rate: float
    function_value_at_zero: float
    function_value_at_rate: float
    bisection_residual: float
    u_max: float


def _h1(spec: ModelSpec, rng: RangeParams) -> tuple[bool, Optional[float], Optional[float], str]:
    m, n, k, M = spec.m, spec.n, rng.k, rng.M
    if not 0 < k < M:
        return False, None, None, "need 0 < k < M"
    if m == n:
        return True, None, None, ""
    peak = flux_argmax(m, n)
    if not k < peak:
        return False, peak, None, f"k = {k!r} is not below the flux argmax {peak!r}"
    k_tilde = companion_point(m, n, k)
    if rng.k_tilde is not None:
        if abs(flux(m, n, rng.k_tilde) - flux(m, n, k)) > 1e-9 or rng.k_tilde <= peak:
            return False, peak, rng.k_tilde, "supplied k_tilde is not the companion point of k"
        k_tilde = rng.k_tilde
    if not peak < M <= k_tilde:
        return False, peak, k_tilde, f"need argmax < M <= k_tilde, got M = {M!r}"
    return True, peak, k_tilde, ""


def check_all(
    spec: ModelSpec,
    rng: RangeParams,
    *,
    H_plus: Optional[float] = None,
    H_minus: Optional[float] = None,
    L: Optional[float] = None,
) -> HypothesisReport:
    """Evaluate the permanence conditions H1-H3 and the contraction condition H4.

    ``H_plus``, ``H_minus`` and ``L`` override the values derived from the
    harvesting term (useful to reproduce quoted reference constants).
    """
    a_lo, a_hi = spec.a.bounds()
    b_lo = tuple(bi.bounds()[0] for bi in spec.b)
    b_hi = tuple(bi.bounds()[1] for bi in spec.b)
    h_lo, h_hi = spec.harvest.h_range(rng.k, rng.M)
    Hm = h_lo if H_minus is None else float(H_minus)
    Hp = h_hi if H_plus is None else float(H_plus)
    Lv = spec.L if L is None else float(L)
    L_req = spec.harvest.lipschitz_required(rng.k, rng.M)
    m, n, k, M = spec.m, spec.n, rng.k, rng.M
    C = mean_value_constant(m, n, k, M)
    h1, peak, k_tilde, why = _h1(spec, rng)
    return HypothesisReport(
        h1_pass=h1,
        h2_value=-a_lo * M + sum(b_hi) - Hm,
        h3_value=-a_hi * k + sum(b_lo) * k**m / (1.0 + k**n) - Hp,
        h4_value=-a_lo + (sum(b_hi) * C + Lv),
        extinction_pass=extinction_condition(spec),
        a_minus=a_lo,
        a_plus=a_hi,
        b_minus=b_lo,
        b_plus=b_hi,
        H_minus=Hm,
        H_plus=Hp,
        H_plus_computed=h_hi,
        r=max_delay(spec),
        L=Lv,
        L_required=L_req,
        lipschitz_pass=Lv >= L_req,
        flux_factor=C,
        argmax=peak,
        k_tilde=k_tilde,
        h1_reason=why,
    )


def extinction_condition(spec: ModelSpec) -> bool:
    """True iff ``inf a > sum_i sup b_i``."""
    return spec.a.bounds()[0] > sum(bi.bounds()[1] for bi in spec.b)


def rate_function(kind: str, spec: ModelSpec, rng: Optional[RangeParams] = None, r: Optional[float] = None, L: Optional[float] = None):
    """Return the auxiliary function ``u -> value`` for ``kind``.

    extinction_G:      u - a^- + (sum b^+) e^(u r)
    contraction_gamma: -a^- + (sum b^+ C + L) e^u
    stability_Delta:   u - a^- + (sum b^+ C + L) e^(u r)
    """
    if kind not in RATE_KINDS:
        raise ValueError(f"kind must be one of {RATE_KINDS}")
    a_lo = spec.a.bounds()[0]
    b_sum = sum(bi.bounds()[1] for bi in spec.b)
    r = max_delay(spec) if r is None else float(r)
    if kind == "extinction_G":
        return lambda u: (u - a_lo) + b_sum * math.exp(u * r)
    if rng is None:
        raise ValueError(f"{kind} needs the range parameters")
    Lv = spec.L if L is None else float(L)
    X = b_sum * mean_value_constant(spec.m, spec.n, rng.k, rng.M) + Lv
    if kind == "contraction_gamma":
        return lambda u: -a_lo + X * math.exp(u)
    return lambda u: (u - a_lo) + X * math.exp(u * r)


def rate_bisect(
    kind: str,
    spec: ModelSpec,
    rng: Optional[RangeParams] = None,
    r: Optional[float] = None,
    *,
    L: Optional[float] = None,
    u_max: Optional[float] = None,
    xtol: float = 1e-10,
    shrink: float = 1e-6,
) -> RateCertificate:
    """Largest certifiable rate in ``(0, u_max]`` at which the auxiliary function is negative.

    Raises :class:`ConditionNotSatisfied` when the function is not negative at
    zero (the corresponding result does not apply).
    """
    func = rate_function(kind, spec, rng, r, L)
    r_val = max_delay(spec) if r is None else float(r)
    if u_max is None:
        u_max = 10.0 / r_val if kind == "stability_Delta" and r_val > 0 else 1.0
    f0 = func(0.0)
    if not f0 < 0:
        raise ConditionNotSatisfied(f"{kind}: value at zero is {f0:.6g} >= 0, condition not satisfiable")
    if func(u_max) < 0:
        rate, width = u_max, 0.0
    else:
        root = brentq(func, 0.0, u_max, xtol=xtol)
        width = xtol
        rate = root - shrink if root > 2 * shrink else 0.5 * root
    value = func(rate)
    if not value < 0:
        raise ArithmeticError(f"{kind}: certified rate {rate!r} is not strictly negative")
    return RateCertificate(kind, rate, f0, value, width, u_max)

