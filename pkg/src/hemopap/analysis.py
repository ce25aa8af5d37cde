"""Experiment drivers: permanence, extinction and global exponential attraction."""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .builtin import EXAMPLE6_OVERRIDES, EXAMPLE6_RANGE, example6_spec
from .dde_sim import (
    ConstantHistory,
    ExpressionHistory,
    History,
    PermanenceReport,
    Trajectory,
    as_history,
    integrate,
    monitor,
)
from .errors import ConditionNotSatisfied
from .hypotheses import check_all, extinction_condition, rate_bisect
from .model import ModelSpec, RangeParams, max_delay
from .pap_funcs import Const, Scale, Sin, Sum
from .pap_solver import PapSolution

LOG_FLOOR = 1e-10


def worker_count() -> int:
    """Thread cap from ``HEMOPAP_THREADS`` (0 or unset = one per CPU)."""
    try:
        n = int(os.environ.get("HEMOPAP_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _run_all(fn, items):
    items = list(items)
    if worker_count() == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(items))) as pool:
        return list(pool.map(fn, items))


def fit_decay_rate(t: np.ndarray, y: np.ndarray, floor: float = LOG_FLOOR) -> float:
    """Least-squares slope of ``-log|y|`` against ``t`` over samples with ``|y| > floor``."""
    ay = np.abs(y)
    sel = ay > floor
    if sel.sum() < 2:
        return math.inf
    slope = np.polyfit(t[sel], np.log(ay[sel]), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# global attraction


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    lambda_bound: float
    M1: float
    fitted_rate: float
    envelope_pass: bool
    pair: tuple[str, str]
    advisory: bool
    max_ratio: float
    t: np.ndarray
    gap: np.ndarray
    traj_a: Optional[Trajectory] = None
    traj_b: Optional[Trajectory] = None

    @property
    def rate_ordering_pass(self) -> bool:
        return self.fitted_rate >= 0.9 * self.lambda_bound


def attractor_experiment(
    spec: ModelSpec,
    rng: RangeParams,
    phi_a,
    phi_b=None,
    horizon: float = 400.0,
    h: float = 0.01,
    t0: float = 0.0,
    *,
    reference: Optional[PapSolution] = None,
    overrides: Optional[dict] = None,
) -> StabilityCertificate:
    """Check ``|x_A(t) - x_B(t)| <= M1 exp(-lambda (t - t0))`` on every output node.

    ``M1 = M + max over [t0 - r, t0] of the history gap`` and ``lambda`` is
    the certified rate of the stability function.  If ``reference`` is given
    the second trajectory is replaced by that fixed-point solution.  When the
    hypotheses fail the run still happens and the certificate is advisory.
    """
    ov = overrides or {}
    report = check_all(spec, rng, **ov)
    try:
        lam = rate_bisect("stability_Delta", spec, rng, L=ov.get("L")).rate
    except ConditionNotSatisfied:
        lam = float("nan")
    r = max_delay(spec)
    phi_a = as_history(phi_a)
    t_end = t0 + horizon
    if reference is not None:
        traj_a = integrate(spec, phi_a, t0, t_end, h)
        traj_b = None
        if reference.window[0] > t0 - r or reference.window[1] < t_end:
            raise ValueError("reference solution does not cover the experiment window")
        label_b = "pap_solution"
        hist_gap = np.abs(phi_a(np.linspace(t0 - r, t0, 2001)) - reference(np.linspace(t0 - r, t0, 2001)))
        t, xa = traj_a.t, traj_a.x
        y = xa - reference(t)
    else:
        phi_b = as_history(phi_b)
        traj_a, traj_b = _run_all(lambda p: integrate(spec, p, t0, t_end, h), [phi_a, phi_b])
        label_b = phi_b.label
        ts = np.linspace(t0 - r, t0, 2001)
        hist_gap = np.abs(phi_a(ts) - phi_b(ts))
        if isinstance(phi_a, ConstantHistory) and isinstance(phi_b, ConstantHistory):
            hist_gap = np.array([abs(phi_a.value - phi_b.value)])
        t = traj_a.t
        y = traj_a.x - traj_b.x
    M1 = math.exp(lam * t0) * (rng.M + float(hist_gap.max())) if math.isfinite(lam) else float("nan")
    if math.isfinite(lam):
        env = M1 * np.exp(-lam * t)
        ratio = np.abs(y) / env
        max_ratio = float(ratio.max())
        passed = bool(np.all(np.abs(y) <= env))
    else:
        max_ratio, passed = float("nan"), False
    return StabilityCertificate(
        lambda_bound=lam,
        M1=M1,
        fitted_rate=fit_decay_rate(t, y),
        envelope_pass=passed,
        pair=(phi_a.label, label_b),
        advisory=not report.all_pass,
        max_ratio=max_ratio,
        t=t,
        gap=y,
        traj_a=traj_a,
        traj_b=traj_b,
    )


def history_bank(rng: RangeParams, include_sub_box: bool = False) -> list[History]:
    """Constant histories at ``k``, the midpoint and ``M``, plus a trig-modulated one."""
    mid, half = rng.midpoint, 0.5 * (rng.M - rng.k)
    bank: list[History] = [
        ConstantHistory(rng.k, label="k"),
        ConstantHistory(mid, label="mid"),
        ConstantHistory(rng.M, label="M"),
        ExpressionHistory(Sum([Const(mid), Scale(0.8 * half, Sin(1.3))]), label="trig"),
    ]
    if include_sub_box:
        bank += [ConstantHistory(0.1, label="0.1"), ConstantHistory(1.0, label="1")]
    return bank


def envelope_sweep(
    spec: ModelSpec,
    rng: RangeParams,
    histories: Optional[Sequence[History]] = None,
    horizon: float = 400.0,
    h: float = 0.01,
    overrides: Optional[dict] = None,
) -> list[StabilityCertificate]:
    """Attractor experiment on every pair of histories in the bank."""
    histories = list(histories) if histories is not None else history_bank(rng)
    trajs = _run_all(lambda p: integrate(spec, p, 0.0, horizon, h), histories)
    ov = overrides or {}
    lam = rate_bisect("stability_Delta", spec, rng, L=ov.get("L")).rate
    advisory = not check_all(spec, rng, **ov).all_pass
    r = max_delay(spec)
    ts = np.linspace(-r, 0.0, 2001)
    out = []
    for (pa, ta), (pb, tb) in itertools.combinations(zip(histories, trajs), 2):
        y = ta.x - tb.x
        M1 = rng.M + float(np.max(np.abs(pa(ts) - pb(ts))))
        env = M1 * np.exp(-lam * ta.t)
        out.append(
            StabilityCertificate(
                lambda_bound=lam,
                M1=M1,
                fitted_rate=fit_decay_rate(ta.t, y),
                envelope_pass=bool(np.all(np.abs(y) <= env)),
                pair=(pa.label, pb.label),
                advisory=advisory,
                max_ratio=float(np.max(np.abs(y) / env)),
                t=ta.t,
                gap=y,
            )
        )
    return out


# ---------------------------------------------------------------------------
# extinction


@dataclass(frozen=True, eq=False)
class ExtinctionReport:
    lambda_G: float
    Q: float
    history_sup: float
    envelope_pass: bool
    tail_max: float
    x_end: float
    max_ratio: float
    trajectory: Trajectory


def extinction_experiment(spec: ModelSpec, phi, horizon: float = 100.0, h: float = 0.01, t0: float = 0.0) -> ExtinctionReport:
    """Integrate and check ``x(t) <= sup(phi) exp(-lambda_G (t - t0))``.

    Raises :class:`ConditionNotSatisfied` unless ``inf a > sum sup b_i``.
    """
    if not extinction_condition(spec):
        a_lo = spec.a.bounds()[0]
        b_sum = sum(bi.bounds()[1] for bi in spec.b)
        raise ConditionNotSatisfied(
            f"extinction condition not satisfied: a⁻ = {a_lo:.6g} ≤ Σb⁺ = {b_sum:.6g}"
        )
    lam = rate_bisect("extinction_G", spec).rate
    phi = as_history(phi)
    r = max_delay(spec)
    sup_phi = phi.sup(t0 - r, t0)
    traj = integrate(spec, phi, t0, t0 + horizon, h)
    env = sup_phi * np.exp(-lam * (traj.t - t0))
    _, tail = traj.window(t0 + 0.5 * horizon, t0 + horizon)
    return ExtinctionReport(
        lambda_G=lam,
        Q=math.exp(lam * t0) * sup_phi,
        history_sup=sup_phi,
        envelope_pass=bool(np.all(traj.x <= env + 1e-12)),
        tail_max=float(tail.max()),
        x_end=float(traj.x[-1]),
        max_ratio=float(np.max(traj.x / env)),
        trajectory=traj,
    )


# ---------------------------------------------------------------------------
# the two-start reproduction run


@dataclass(frozen=True, eq=False)
class Fig2Result:
    low: Trajectory
    high: Trajectory
    final_window_diff: float
    low_report: PermanenceReport
    high_report: PermanenceReport


def fig2_scenario(horizon: float = 400.0, h: float = 0.01, starts: tuple[float, float] = (0.1, 1.0)) -> Fig2Result:
    """Run the worked example from two constant histories below the box.

    Reports the sup difference over the final 20% of the horizon and a
    permanence report (over the second half of the run) for each start.
    """
    spec = example6_spec()
    low, high = _run_all(lambda v: integrate(spec, ConstantHistory(v), 0.0, horizon, h), starts)
    t_cut = 0.8 * horizon
    _, xl = low.window(t_cut, horizon)
    _, xh = high.window(t_cut, horizon)
    rng = EXAMPLE6_RANGE
    return Fig2Result(
        low=low,
        high=high,
        final_window_diff=float(np.max(np.abs(xl - xh))),
        low_report=monitor(low, spec, rng.k, rng.M, transient=0.5 * horizon, slack=0.05),
        high_report=monitor(high, spec, rng.k, rng.M, transient=0.5 * horizon, slack=0.05),
    )


__all__ = [
    "EXAMPLE6_OVERRIDES",
    "StabilityCertificate",
    "ExtinctionReport",
    "Fig2Result",
    "attractor_experiment",
    "envelope_sweep",
    "extinction_experiment",
    "fig2_scenario",
    "fit_decay_rate",
    "history_bank",
    "worker_count",
]
