"""Acceptance criteria, one test each.

Every test prints (and records for the terminal summary) a single line::

    [PASS] 4 global attraction: ... (12.3 s < 30 s)
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from hemopap.analysis import attractor_experiment, extinction_experiment
from hemopap.builtin import (
    CONSTANT_RANGE,
    EXAMPLE6_OVERRIDES,
    EXAMPLE6_RANGE,
    constant_spec,
    example6_spec,
    extinction_spec,
)
from hemopap.cli import main
from hemopap.dde_sim import integrate, solve_dde
from hemopap.errors import ConditionNotSatisfied
from hemopap.hypotheses import extinction_condition, rate_bisect
from hemopap.model import companion_point, flux, flux_argmax, flux_derivative, max_delay, mean_value_constant
from hemopap.pap_funcs import BumpTrain, PapFunction, ergodic_mean
from hemopap.pap_solver import crosscheck_forward, picard_solve


def report(num, title, checks, elapsed, limit):
    """``checks``: list of (description, ok). Records the line and asserts."""
    ok = all(c for _, c in checks) and elapsed < limit
    detail = "; ".join(f"{d} {'ok' if c else 'FAILED'}" for d, c in checks)
    line = f"[{'PASS' if ok else 'FAIL'}] {num} {title}: {detail} ({elapsed:.2f} s < {limit:g} s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def read_report(path):
    out = {}
    for line in path.read_text().splitlines():
        k, _, v = line.partition(" = ")
        out[k] = v
    return out


def test_1_hypothesis_regression(tmp_path):
    t0 = time.perf_counter()
    code = main(["check", "example6", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    rep = read_report(tmp_path / "check_report.txt")
    h2, h3, h4 = (float(rep[k]) for k in ("h2_value", "h3_value", "h4_value"))
    report(1, "hypothesis regression (H+ = 0.005, H- = 0, L = 0.01, k = 2, M = 3.29)", [
        (f"H2 = {h2:.6g} vs -0.0402 ± 1e-3", abs(h2 + 0.0402) <= 1e-3),
        (f"H3 = {h3:.6g} vs 0.015 ± 1e-3", abs(h3 - 0.015) <= 1e-3),
        (f"H4 = {h4:.6g} vs -0.0515 ± 1e-3", abs(h4 + 0.0515) <= 1e-3),
        ("all_pass, exit 0", rep["all_pass"] == "true" and code == 0),
    ], elapsed, 1.0)


def test_2_derived_constants():
    t0 = time.perf_counter()
    spec = example6_spec()
    a_lo, a_hi = spec.a.bounds()
    b_lo, b_hi = spec.b[0].bounds()
    r = max_delay(spec)
    elapsed = time.perf_counter() - t0
    tol = 1e-9
    report(2, "derived constants", [
        (f"a- = {a_lo!r}", abs(a_lo - 0.38) <= tol),
        (f"a+ = {a_hi!r}", abs(a_hi - 0.39) <= tol),
        (f"b- = {b_lo!r}", abs(b_lo - 1.0) <= tol),
        (f"b+ = {b_hi!r}", abs(b_hi - 1.21) <= tol),
        (f"r = {r!r} (tol 1e-9)", abs(r - 4.0) <= tol),
    ], elapsed, 1.0)


def test_3_permanence():
    spec = example6_spec()
    t0 = time.perf_counter()
    checks = []
    for phi in (2.0, 2.645, 3.29):
        traj = integrate(spec, phi, 0.0, 200.0, 0.01)
        lo, hi = traj.x.min(), traj.x.max()
        checks.append((f"phi = {phi}: x in [{lo:.6f}, {hi:.6f}] within [2 - 1e-3, 3.29 + 1e-3]", lo >= 2 - 1e-3 and hi <= 3.29 + 1e-3))
    report(3, "permanence over [0, 200], h = 0.01", checks, time.perf_counter() - t0, 10.0)


def test_4_global_attraction():
    spec = example6_spec()
    t0 = time.perf_counter()
    cert = attractor_experiment(spec, EXAMPLE6_RANGE, 2.0, 3.29, horizon=400.0, h=0.01, overrides=EXAMPLE6_OVERRIDES)
    elapsed = time.perf_counter() - t0
    report(4, "global attraction (phi 2.0 vs 3.29 over [0, 400])", [
        (f"lambda = {cert.lambda_bound:.6g} ≈ 0.0216", abs(cert.lambda_bound - 0.0216) <= 2e-4),
        (f"envelope M1 e^(-lambda t), M1 = {cert.M1:.4g}, max ratio {cert.max_ratio:.3g}", cert.envelope_pass),
        (f"fitted rate {cert.fitted_rate:.4g} >= 0.9 lambda", cert.fitted_rate >= 0.9 * cert.lambda_bound),
    ], elapsed, 30.0)


def test_5_extinction():
    t0 = time.perf_counter()
    rep = extinction_experiment(extinction_spec(), 1.0, horizon=100.0, h=0.01)
    x50 = float(rep.trajectory(50.0))
    spec6 = example6_spec()
    try:
        extinction_experiment(spec6, 1.0)
        precondition_fails = False
    except ConditionNotSatisfied:
        precondition_fails = True
    traj6 = integrate(spec6, EXAMPLE6_RANGE.midpoint, 0.0, 400.0, 0.01)
    _, tail = traj6.window(200.0, 400.0)
    elapsed = time.perf_counter() - t0
    report(5, "extinction", [
        (f"lambda_G = {rep.lambda_G:.6g} ≈ 0.315 ± 1e-3", abs(rep.lambda_G - 0.315) <= 1e-3),
        (f"Q e^(-lambda_G t) envelope (max ratio {rep.max_ratio:.3g})", rep.envelope_pass),
        (f"x(50) = {x50:.3g} < 1e-6", x50 < 1e-6),
        ("worked example fails a- > sum b+", precondition_fails and not extinction_condition(spec6)),
        (f"worked example tail min {tail.min():.4g} > 1", tail.min() > 1.0),
    ], elapsed, 10.0)


def test_6_fixed_point_construction():
    t0 = time.perf_counter()
    spec = constant_spec()
    x_star = (1.1 + math.sqrt(1.1**2 - 4 * 0.38**2)) / (2 * 0.38)
    sol = picard_solve(spec, CONSTANT_RANGE, (0.0, 50.0), 0.05, None, 1e-8)
    zeta = rate_bisect("contraction_gamma", spec, CONSTANT_RANGE).rate
    err = float(np.max(np.abs(sol.values - x_star)))
    ratio = float(np.max(sol.contraction_ratios[-3:]))
    spec6 = example6_spec()
    sol6 = picard_solve(spec6, EXAMPLE6_RANGE, (0.0, 100.0), 0.05, 60.0, 1e-6, **EXAMPLE6_OVERRIDES)
    xc = crosscheck_forward(spec6, sol6)
    elapsed = time.perf_counter() - t0
    report(6, "fixed-point construction", [
        (f"|x - x*| = {err:.2g} <= 1e-4 (x* = {x_star:.7f}, root of 0.38(1+x^2) = 1.1x)", err <= 1e-4),
        ("iterates in [k, M]", sol.box_ok),
        (f"contraction ratio {ratio:.4f} <= e^(-zeta) + 0.05 = {math.exp(-zeta) + 0.05:.4f}", ratio <= math.exp(-zeta) + 0.05),
        (f"worked example crosscheck {xc:.3g} <= 0.05 over [r, 100]", xc <= 0.05),
    ], elapsed, 60.0)


def test_7_integrator_order():
    t0 = time.perf_counter()
    one = PapFunction.constant(1.0)

    def run(h):
        return solve_dde(lambda t, x, lag: -x + 0.5 * lag[0], [one], 1.0, 0.0, 3.0, h)
    a, b, c = run(0.1), run(0.05), run(0.025)
    d1 = np.max(np.abs(a.x - b(a.t)))
    d2 = np.max(np.abs(b(a.t) - c(a.t)))
    decay = integrate(constant_spec(a=1.0, b=0.0), 1.0, 0.0, 5.0, 0.01)
    derr = abs(decay.x[-1] - math.exp(-5.0))
    elapsed = time.perf_counter() - t0
    report(7, "integrator order", [
        (f"self-convergence ratio {d1 / d2:.2f} >= 8", d1 / d2 >= 8),
        (f"pure decay error {derr:.2g} <= 1e-8", derr <= 1e-8),
    ], elapsed, 5.0)


def test_8_bump_train_ergodicity():
    t0 = time.perf_counter()
    m3 = ergodic_mean(BumpTrain(1.0), 1e3)
    m4 = ergodic_mean(BumpTrain(1.0), 1e4)
    ratio = m4 / m3
    target = 10 ** (-1 / 3)
    elapsed = time.perf_counter() - t0
    report(8, "ergodicity of the bump train", [
        (f"mean(1e3) = {m3:.5g} > mean(1e4) = {m4:.5g}", m4 < m3),
        (f"ratio {ratio:.4f} within ±30% of {target:.4f}", abs(ratio / target - 1) <= 0.3),
    ], elapsed, 30.0)


def test_9_flux_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20241015)
    n_cases = 10_000
    m = rng.uniform(1.01, 6.0, n_cases)
    n = m + rng.uniform(0.0, 6.0, n_cases)
    n[: n_cases // 5] = m[: n_cases // 5]  # include the m = n case
    u = rng.exponential(3.0, n_cases)

    fv = flux(m, n, u)
    cap = bool(np.all((fv >= 0.0) & (fv <= 1.0)))

    d = flux_derivative(m, n, u)
    equal = m == n
    with np.errstate(divide="ignore"):
        peak = np.where(equal, np.inf, (m / np.where(equal, 1.0, n - m)) ** (1.0 / n))
    away = np.abs(u - peak) > 1e-6 * np.where(equal, 1.0, peak)
    sign_ok = bool(np.all(np.where(equal, (u == 0) | (d > 0), ~away | ((d > 0) == (u < peak)))))

    strict = n > m + 0.05
    comp_ok = True
    n_comp = 0
    for mi, ni, f in zip(m[strict], n[strict], rng.uniform(0.02, 0.98, n_cases)[strict]):
        k = f * flux_argmax(mi, ni)
        kt = companion_point(mi, ni, k)
        comp_ok &= abs(flux(mi, ni, kt) - flux(mi, ni, k)) <= 1e-10
        n_comp += 1
    extra = n_cases - n_comp
    for _ in range(extra):
        mi = rng.uniform(1.01, 6.0)
        ni = mi + rng.uniform(0.05, 6.0)
        k = rng.uniform(0.02, 0.98) * flux_argmax(mi, ni)
        comp_ok &= abs(flux(mi, ni, companion_point(mi, ni, k)) - flux(mi, ni, k)) <= 1e-10

    k = rng.uniform(0.05, 5.0, n_cases)
    M = k + rng.uniform(0.01, 5.0, n_cases)
    x = k + rng.uniform(0, 1, n_cases) * (M - k)
    y = k + rng.uniform(0, 1, n_cases) * (M - k)
    C = mean_value_constant(m, n, k, M)
    mv_ok = bool(np.all(np.abs(flux(m, n, x) - flux(m, n, y)) <= C * np.abs(x - y) * (1 + 1e-12) + 1e-15))
    elapsed = time.perf_counter() - t0
    report(9, f"flux properties on {n_cases} random cases each", [
        ("derivative sign", sign_ok),
        ("cap 0 <= flux <= 1", cap),
        ("companion symmetry 1e-10", comp_ok),
        ("mean-value Lipschitz bound", mv_ok),
    ], elapsed, 5.0)
