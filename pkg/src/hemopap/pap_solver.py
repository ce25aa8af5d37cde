"""Fixed point of the integral operator

    (Gamma psi)(t) = int_{-inf}^t exp(-int_s^t a) [sum_i b_i(s) f(psi(s - tau_i(s))) - H(s, psi(s - sigma(s)))] ds

computed by Picard iteration on a uniform grid.

Quadrature is a product trapezoid rule: the integrand is interpolated
linearly on each cell and the exponential kernel, with ``a`` frozen at its
cell mean, is integrated exactly.  The rule is second order and exact for
constant coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .dde_sim import GridHistory, integrate
from .errors import ConditionNotSatisfied, NonConvergence
from .hypotheses import check_all, rate_bisect
from .model import ModelSpec, RangeParams, flux, max_delay


class GammaValue(NamedTuple):
    value: float
    tail_bound: float


@dataclass(frozen=True, eq=False)
class PapSolution:
    window: tuple[float, float]
    grid_step: float
    t: np.ndarray
    values: np.ndarray
    iterations: int
    contraction_ratios: np.ndarray
    residual_fixed_point: float
    residual_ode: float
    tail_bound: float
    T_trunc: float
    box_ok: bool
    contraction_bound: float
    padded_t: np.ndarray
    padded_values: np.ndarray
    k: float
    M: float

    def __call__(self, t):
        return np.interp(t, self.padded_t, self.padded_values)


def integrand_bound(spec: ModelSpec) -> float:
    """Upper bound on ``sup |G|`` for any non-negative ``psi``."""
    h_sup = spec.harvest.c.bounds()[1] * spec.harvest.shape_sup if spec.harvest.active else 0.0
    return sum(bi.bounds()[1] for bi in spec.b) + h_sup


def tail_bound(spec: ModelSpec, T_trunc: float) -> float:
    """Error from cutting the integral at ``t - T_trunc``."""
    a_lo = spec.a.bounds()[0]
    return integrand_bound(spec) * math.exp(-a_lo * T_trunc) / a_lo


def default_truncation(spec: ModelSpec, tol: float) -> float:
    """Smallest ``T_trunc`` whose tail bound is below ``tol / 10``."""
    a_lo = spec.a.bounds()[0]
    g = integrand_bound(spec)
    if g == 0:
        return 0.0
    return max(0.0, math.log(10.0 * g / (a_lo * tol)) / a_lo)


def _exp_weights(alpha: np.ndarray, delta: float):
    """Per-cell ``(E, w0, w1)`` with ``int_0^delta e^{-alpha(delta-u)} g(u) du = w0 g(0) + w1 g(delta)``
    for linear ``g``, and ``E = e^{-alpha delta}``."""
    z = np.asarray(alpha, dtype=float) * delta
    small = z < 1e-2
    zs = np.where(small, 1.0, z)
    om = -np.expm1(-z)
    q1 = np.where(small, 1 - z / 2 + z**2 / 6 - z**3 / 24 + z**4 / 120 - z**5 / 720, om / zs)
    q2 = np.where(small, 0.5 - z / 6 + z**2 / 24 - z**3 / 120 + z**4 / 720 - z**5 / 5040, (z - om) / zs**2)
    w1 = delta * q2
    return np.exp(-z), delta * q1 - w1, w1


class _Integrand:
    """``G(s)`` at fixed sample times for any grid function ``psi``."""

    def __init__(self, spec: ModelSpec, s: np.ndarray):
        self.spec = spec
        self.b = [np.asarray(bi(s), dtype=float) for bi in spec.b]
        self.tau_lag = [s - np.asarray(tau(s), dtype=float) for tau in spec.tau]
        if spec.harvest.active:
            self.c = np.asarray(spec.harvest.c(s), dtype=float)
            self.sigma_lag = s - np.asarray(spec.sigma(s), dtype=float)

    def __call__(self, grid_t: np.ndarray, psi: np.ndarray) -> np.ndarray:
        spec = self.spec
        out = np.zeros_like(self.b[0])
        for bi, lag in zip(self.b, self.tau_lag):
            out += bi * flux(spec.m, spec.n, np.interp(lag, grid_t, psi))
        if spec.harvest.active:
            out -= self.c * spec.harvest.shape_fn(np.interp(self.sigma_lag, grid_t, psi))
        return out


def gamma_apply(
    spec: ModelSpec,
    psi_t: np.ndarray,
    psi_x: np.ndarray,
    t: float,
    T_trunc: float,
    quad_step: float = 0.01,
    tol: Optional[float] = None,
) -> GammaValue:
    """Truncated ``(Gamma psi)(t)`` over ``[t - T_trunc, t]``.

    ``psi`` is the piecewise-linear function through ``(psi_t, psi_x)`` and
    must cover ``[t - T_trunc - r, t]``.  The tail bound is returned with the
    value; if ``tol`` is given and the bound exceeds it a ``ValueError`` is
    raised.
    """
    psi_t = np.asarray(psi_t, dtype=float)
    psi_x = np.asarray(psi_x, dtype=float)
    r = max_delay(spec)
    eps = 1e-9 * max(1.0, abs(t))
    if psi_t[0] > t - T_trunc - r + eps or psi_t[-1] < t - eps:
        raise ValueError(f"psi must cover [{t - T_trunc - r}, {t}], got [{psi_t[0]}, {psi_t[-1]}]")
    bound = tail_bound(spec, T_trunc)
    if tol is not None and bound > tol:
        raise ValueError(f"tail bound {bound:.3g} above tolerance {tol:.3g}; increase T_trunc")
    if T_trunc <= 0:
        return GammaValue(0.0, bound)
    n = max(1, int(math.ceil(T_trunc / quad_step - 1e-9)))
    s = np.linspace(t - T_trunc, t, n + 1)
    delta = T_trunc / n
    a = np.asarray(spec.a(s), dtype=float)
    alpha = 0.5 * (a[:-1] + a[1:])
    # exponent int_{s_{j+1}}^t a, accumulated once from the right
    tail_exp = np.concatenate([np.cumsum((alpha * delta)[::-1])[::-1][1:], [0.0]])
    E, w0, w1 = _exp_weights(alpha, delta)
    G = _Integrand(spec, s)(psi_t, psi_x)
    value = float(np.sum(np.exp(-tail_exp) * (w0 * G[:-1] + w1 * G[1:])))
    return GammaValue(value, bound)


def _sweep(E, w0, w1, G, a0):
    beta = (w0 * G[:-1] + w1 * G[1:]).tolist()
    Ev = E.tolist()
    F = [float(G[0] / a0)]
    f = F[0]
    for e, bj in zip(Ev, beta):
        f = e * f + bj
        F.append(f)
    return np.array(F)


def picard_solve(
    spec: ModelSpec,
    rng: RangeParams,
    window: tuple[float, float] = (0.0, 100.0),
    grid_step: float = 0.05,
    T_trunc: Optional[float] = None,
    tol: float = 1e-6,
    max_iter: int = 200,
    *,
    H_plus: Optional[float] = None,
    H_minus: Optional[float] = None,
    L: Optional[float] = None,
) -> PapSolution:
    """Picard iteration ``psi <- Gamma psi`` from the box midpoint.

    The grid covers ``[W0 - T_trunc - r, W1]``; the integral before the left
    end is replaced by its quasi-static value ``G/a``.  Raises
    :class:`ConditionNotSatisfied` if H1-H4 fail and :class:`NonConvergence`
    if ``tol`` is not reached within ``max_iter`` sweeps.
    """
    report = check_all(spec, rng, H_plus=H_plus, H_minus=H_minus, L=L)
    if not report.all_pass:
        failed = [name for name, ok in (("H1", report.h1_pass), ("H2", report.h2_pass), ("H3", report.h3_pass), ("H4", report.h4_pass), ("Lipschitz", report.lipschitz_pass)) if not ok]
        raise ConditionNotSatisfied("hypotheses not satisfied: " + ", ".join(failed))
    W0, W1 = float(window[0]), float(window[1])
    if not W1 > W0 or not grid_step > 0:
        raise ValueError("need W1 > W0 and grid_step > 0")
    if T_trunc is None:
        T_trunc = default_truncation(spec, tol)
    r = max_delay(spec)
    n_win = max(1, int(round((W1 - W0) / grid_step)))
    delta = (W1 - W0) / n_win
    n_pad = int(math.ceil((T_trunc + r) / delta - 1e-9))
    t = W0 + delta * np.arange(-n_pad, n_win + 1)
    a = np.asarray(spec.a(t), dtype=float)
    E, w0, w1 = _exp_weights(0.5 * (a[:-1] + a[1:]), delta)
    G_of = _Integrand(spec, t)

    k, M = rng.k, rng.M
    psi = np.full(t.shape, rng.midpoint)
    diffs: list[float] = []
    box_ok = True
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = _sweep(E, w0, w1, G_of(t, psi), a[0])
        if new.min() < k - 1e-9 or new.max() > M + 1e-9:
            box_ok = False
        diffs.append(float(np.max(np.abs(new - psi))))
        psi = new
        if diffs[-1] <= tol:
            converged = True
            break
    ratios = np.array(diffs[1:]) / np.maximum(np.array(diffs[:-1]), 1e-300)
    if not converged:
        last = ratios[-1] if ratios.size else float("nan")
        raise NonConvergence(f"Picard iteration did not reach {tol:g} in {max_iter} sweeps (last ratio {last:.3g})")

    win = slice(n_pad, None)
    G = G_of(t, psi)
    res_fp = float(np.max(np.abs(_sweep(E, w0, w1, G, a[0])[win] - psi[win])))
    j = np.arange(n_pad + 1, t.size - 1)
    deriv = (psi[j + 1] - psi[j - 1]) / (2.0 * delta)
    res_ode = float(np.max(np.abs(deriv - (-a[j] * psi[j] + G[j])))) if j.size else 0.0
    try:
        zeta = rate_bisect("contraction_gamma", spec, rng, L=L).rate
        bound = math.exp(-zeta)
    except ConditionNotSatisfied:
        bound = float("nan")
    return PapSolution(
        window=(W0, W1),
        grid_step=delta,
        t=t[win].copy(),
        values=psi[win].copy(),
        iterations=it,
        contraction_ratios=ratios,
        residual_fixed_point=res_fp,
        residual_ode=res_ode,
        tail_bound=tail_bound(spec, T_trunc),
        T_trunc=float(T_trunc),
        box_ok=box_ok,
        contraction_bound=bound,
        padded_t=t,
        padded_values=psi,
        k=k,
        M=M,
    )


def crosscheck_forward(spec: ModelSpec, sol: PapSolution, horizon: Optional[float] = None, h: float = 0.01) -> float:
    """Sup distance between a forward simulation seeded from ``sol`` and ``sol`` itself.

    The history is ``sol`` on ``[W0, W0 + r]``; the comparison runs over
    ``[W0 + r, W1]`` (or ``horizon`` time units of it).
    """
    r = max_delay(spec)
    W0, W1 = sol.window
    t0 = W0 + r
    t_end = W1 if horizon is None else min(W1, t0 + horizon)
    if not t_end > t0:
        raise ValueError("window shorter than the maximal delay")
    phi = GridHistory(sol.padded_t, sol.padded_values, label="pap_solution")
    traj = integrate(spec, phi, t0, t_end, h)
    sel = (sol.t >= t0) & (sol.t <= t_end)
    return float(np.max(np.abs(traj(sol.t[sel]) - sol.values[sel])))
