"""Method-of-steps integration of scalar delay differential equations.

Classical RK4 on a fixed grid with cubic Hermite dense output.  Delayed
states are read from the initial history, from the Hermite interpolant of
completed steps, or, when a delay is shorter than the current step, by
extrapolating the last completed segment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import IntegrationError, PositivityViolation
from .model import ModelSpec, max_delay
from .pap_funcs import ApExpr, ArrayLike, PapFunction

NEG_TOL = 1e-9


# ---------------------------------------------------------------------------
# initial histories


class History:
    label: str = "history"

    def __call__(self, t: ArrayLike) -> np.ndarray:
        raise NotImplementedError

    def sup(self, t_lo: float, t_hi: float, step: float = 1e-3) -> float:
        n = max(2, int(math.ceil((t_hi - t_lo) / step)) + 1)
        return float(np.max(np.abs(self(np.linspace(t_lo, t_hi, n)))))


@dataclass(frozen=True)
class ConstantHistory(History):
    value: float
    label: str = ""

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("history value at t0 must be positive")
        if not self.label:
            object.__setattr__(self, "label", f"const({self.value:g})")

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value))

    def sup(self, t_lo, t_hi, step=1e-3):
        return float(self.value)


@dataclass(frozen=True)
class ExpressionHistory(History):
    """History given by an expression in absolute time, clipped below at zero."""

    expr: Union[ApExpr, PapFunction]
    label: str = "expression"

    def __call__(self, t):
        return np.maximum(np.asarray(self.expr(np.asarray(t, dtype=float)), dtype=float), 0.0)


@dataclass(frozen=True, eq=False)
class GridHistory(History):
    """Piecewise-linear history through ``(times, values)``."""

    times: np.ndarray
    values: np.ndarray
    label: str = "grid"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("grid history needs increasing times and matching values")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    def sup(self, t_lo, t_hi, step=1e-3):
        inside = (self.times >= t_lo) & (self.times <= t_hi)
        pts = np.concatenate([self.values[inside], self([t_lo, t_hi])])
        return float(np.max(np.abs(pts)))


def as_history(phi) -> History:
    if isinstance(phi, History):
        return phi
    if isinstance(phi, (int, float)):
        return ConstantHistory(float(phi))
    if isinstance(phi, (ApExpr, PapFunction)):
        return ExpressionHistory(phi)
    raise TypeError(f"cannot build a history from {type(phi).__name__}")


# ---------------------------------------------------------------------------
# trajectories


def _hermite(ta, tb, xa, xb, da, db, s):
    hh = tb - ta
    th = (s - ta) / hh
    om = 1.0 - th
    return (1.0 + 2.0 * th) * om * om * xa + th * om * om * hh * da + th * th * (3.0 - 2.0 * th) * xb - th * th * om * hh * db


@dataclass(frozen=True, eq=False)
class Trajectory:
    t0: float
    t_end: float
    h: float
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    phi: History
    r: float
    fingerprint: str = ""

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return dense_eval(self, t)

    def window(self, t_lo: float, t_hi: float) -> tuple[np.ndarray, np.ndarray]:
        sel = (self.t >= t_lo - 1e-12) & (self.t <= t_hi + 1e-12)
        return self.t[sel], self.x[sel]


def dense_eval(traj: Trajectory, t: ArrayLike) -> ArrayLike:
    """Cubic Hermite evaluation; exact at nodes, history below ``t0``."""
    ta = np.asarray(t, dtype=float)
    scalar = ta.ndim == 0
    ta = np.atleast_1d(ta)
    slack = 1e-9 * max(1.0, abs(traj.t_end), abs(traj.t0))
    if np.any(ta < traj.t0 - traj.r - slack) or np.any(ta > traj.t_end + slack):
        raise ValueError(f"t outside [{traj.t0 - traj.r}, {traj.t_end}]")
    out = np.empty_like(ta)
    past = ta < traj.t0
    out[past] = traj.phi(ta[past])
    fut = ~past
    if fut.any():
        s = np.minimum(ta[fut], traj.t_end)
        j = np.clip(np.searchsorted(traj.t, s, side="right") - 1, 0, traj.t.size - 2)
        out[fut] = _hermite(traj.t[j], traj.t[j + 1], traj.x[j], traj.x[j + 1], traj.dx[j], traj.dx[j + 1], s)
        exact = traj.t[j] == s
        out_f = out[fut]
        out_f[exact] = traj.x[j[exact]]
        out[fut] = out_f
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# the stepping core

Field = Callable[[int, float, list], float]


def _march(make_field, delays, phi: History, t0: float, t_end: float, h: float, positive: bool):
    if not h > 0 or not t_end > t0:
        raise ValueError("need h > 0 and t_end > t0")
    K = max(1, int(math.ceil((t_end - t0) / h - 1e-9)))
    nodes = t0 + h * np.arange(K + 1)
    nodes[-1] = t_end
    stage = np.empty((K, 3))
    stage[:, 0] = nodes[:-1]
    stage[:, 1] = nodes[:-1] + 0.5 * np.diff(nodes)
    stage[:, 2] = nodes[1:]
    flat = stage.ravel()
    fld = make_field(flat)

    D = len(delays)
    lag_t = [(flat - np.asarray(d(flat), dtype=float)).tolist() for d in delays]
    hist = []
    for lt in lag_t:
        la = np.asarray(lt)
        hv = np.asarray(phi(np.minimum(la, t0)), dtype=float)
        hist.append(np.where(la <= t0, hv, np.nan).tolist())

    T = nodes.tolist()
    X = [float(phi(np.array([t0]))[0])]
    DX: list[float] = []
    inv_h = 1.0 / h
    isnan = math.isnan

    def lookup(i: int, c: int, xnext: bool) -> list:
        # c: last node with a known derivative; xnext: value at node c+1 known
        out = []
        for d in range(D):
            v = hist[d][i]
            if isnan(v):
                s = lag_t[d][i]
                tc = T[c]
                if s <= tc:
                    q = min(int((s - t0) * inv_h), c - 1)
                    v = _hermite(T[q], T[q + 1], X[q], X[q + 1], DX[q], DX[q + 1], s)
                elif xnext:
                    th = (s - tc) / (T[c + 1] - tc)
                    hh = T[c + 1] - tc
                    v = X[c] + hh * DX[c] * th + (X[c + 1] - X[c] - hh * DX[c]) * th * th
                elif c >= 1:
                    v = _hermite(T[c - 1], tc, X[c - 1], X[c], DX[c - 1], DX[c], s)
                else:
                    v = X[0] + DX[0] * (s - t0)
                if positive and v < 0.0:
                    if v < -NEG_TOL:
                        raise PositivityViolation(s, v)
                    v = 0.0
            out.append(v)
        return out

    for k in range(K):
        tk = T[k]
        hk = T[k + 1] - tk
        xk = X[k]
        base = 3 * k
        k1 = fld(base, xk, lookup(base, k - 1, True))
        DX.append(k1)
        lag = lookup(base + 1, k, False)
        k2 = fld(base + 1, xk + 0.5 * hk * k1, lag)
        k3 = fld(base + 1, xk + 0.5 * hk * k2, lag)
        k4 = fld(base + 2, xk + hk * k3, lookup(base + 2, k, False))
        xn = xk + hk / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(xn):
            raise IntegrationError(f"non-finite state at t = {T[k + 1]:.6g}")
        if positive and xn < 0.0:
            if xn < -NEG_TOL:
                raise PositivityViolation(T[k + 1], xn)
        X.append(xn)
    last = 3 * K - 1
    DX.append(fld(last, X[K], lookup(last, K - 1, True)))
    return nodes, np.array(X), np.array(DX)


def solve_dde(
    f: Callable[[float, float, Sequence[float]], float],
    delays: Sequence[Callable[[ArrayLike], ArrayLike]],
    phi,
    t0: float,
    t_end: float,
    h: float,
    r: Optional[float] = None,
    positive: bool = False,
) -> Trajectory:
    """Integrate a generic scalar DDE ``x' = f(t, x, [x(t - d(t)) for d in delays])``."""
    phi = as_history(phi)

    def make_field(times):
        ts = times.tolist()
        return lambda i, x, lag: f(ts[i], x, lag)

    if r is None:
        probe = np.linspace(t0, t_end, 1001)
        r = max([float(np.max(d(probe))) for d in delays] + [0.0])
    t, x, dx = _march(make_field, list(delays), phi, t0, t_end, h, positive)
    return Trajectory(t0, t_end, h, t, x, dx, phi, float(r))


def _model_field(spec: ModelSpec):
    m, n, N = spec.m, spec.n, spec.N
    harvest = spec.harvest
    shape = harvest.shape

    def make_field(times):
        a = np.asarray(spec.a(times), dtype=float).tolist()
        bs = [np.asarray(bi(times), dtype=float).tolist() for bi in spec.b]
        c = np.asarray(harvest.c(times), dtype=float).tolist() if harvest.active else None

        def fld(i, x, lag):
            acc = -a[i] * x
            for d in range(N):
                u = lag[d]
                acc += bs[d][i] * (u**m / (1.0 + u**n))
            if c is not None:
                u = lag[N]
                acc -= c[i] * (u / (1.0 + u * u) if shape == "rational" else u / (1.0 + u))
            return acc

        return fld

    return make_field


def integrate(spec: ModelSpec, phi, t0: float, t_end: float, h: float = 0.01) -> Trajectory:
    """Integrate the model from history ``phi`` on ``[t0 - r, t0]`` up to ``t_end``.

    Raises :class:`PositivityViolation` if a state drops below ``-1e-9``.
    """
    phi = as_history(phi)
    if not float(phi(np.array([t0]))[0]) > 0:
        raise ValueError("history must be positive at t0")
    delays = list(spec.tau)
    if spec.harvest.active:
        delays.append(spec.sigma)
    t, x, dx = _march(_model_field(spec), delays, phi, t0, t_end, h, positive=True)
    return Trajectory(t0, t_end, h, t, x, dx, phi, max_delay(spec), spec.fingerprint())


# ---------------------------------------------------------------------------
# monitoring


@dataclass(frozen=True)
class PermanenceReport:
    k: float
    M: float
    transient: float
    x_min: float
    x_max: float
    lower_ok: bool
    upper_ok: bool
    envelope_bound: float
    envelope_ok: bool
    slack: float = 1e-3

    @property
    def permanent(self) -> bool:
        return self.lower_ok and self.upper_ok


def monitor(traj: Trajectory, spec: ModelSpec, k: float, M: float, transient: float = 0.0, slack: float = 1e-3) -> PermanenceReport:
    """Check ``k <= x <= M`` after the transient and the a-priori bound ``phi(t0) + sum b^+ / a^-``."""
    if transient < 0:
        raise ValueError("transient must be non-negative")
    _, xs = traj.window(traj.t0 + transient, traj.t_end)
    if xs.size == 0:
        raise ValueError("transient longer than the run")
    bound = float(traj.x[0]) + sum(bi.bounds()[1] for bi in spec.b) / spec.a.bounds()[0]
    lo, hi = float(xs.min()), float(xs.max())
    return PermanenceReport(
        k=k,
        M=M,
        transient=transient,
        x_min=lo,
        x_max=hi,
        lower_ok=lo >= k - slack,
        upper_ok=hi <= M + slack,
        envelope_bound=bound,
        envelope_ok=bool(np.all(traj.x <= bound)),
        slack=slack,
    )
