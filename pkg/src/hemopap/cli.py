"""Command-line front end.

    hemopap check example6
    hemopap simulate my.scn --phi 2.5 --out results/
    hemopap solve-pap | stability | extinction | fig2 ...

Exit status: 0 on pass, 1 when a condition fails, 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .dde_sim import ConstantHistory, integrate, monitor
from .errors import ConditionNotSatisfied, HemopapError
from .export import write_csv, write_svg
from .hypotheses import check_all, rate_bisect
from .pap_solver import crosscheck_forward, picard_solve
from .scenario import Scenario, parse_scenario

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _emit(lines: list[tuple[str, object]], out_dir: Path, name: str) -> None:
    text = "".join(f"{k} = {_fmt(v)}\n" for k, v in lines)
    sys.stdout.write(text)
    (out_dir / name).write_text(text, encoding="utf-8", newline="\n")


def _rate(kind, sc: Scenario):
    try:
        return rate_bisect(kind, sc.model, sc.range, L=sc.overrides.get("L")).rate
    except ConditionNotSatisfied:
        return None


def cmd_check(sc: Scenario, args, out: Path) -> int:
    rep = check_all(sc.model, sc.range, **sc.hypothesis_kwargs())
    d = rep.as_dict()
    keys = ["all_pass", "h1_pass", "h1_reason", "h2_value", "h2_pass", "h3_value", "h3_pass", "h4_value", "h4_pass",
            "lipschitz_pass", "extinction_pass", "a_minus", "a_plus", "b_minus", "b_plus", "H_minus", "H_plus",
            "H_plus_computed", "r", "L", "L_required", "flux_factor", "argmax", "k_tilde"]
    lines = [(k, d[k]) for k in keys if not (k == "h1_reason" and not d[k])]
    lines += [
        ("lambda", _rate("stability_Delta", sc) if rep.h4_pass else None),
        ("zeta", _rate("contraction_gamma", sc) if rep.h4_pass else None),
        ("lambda_G", _rate("extinction_G", sc) if rep.extinction_pass else None),
    ]
    _emit(lines, out, "check_report.txt")
    return EXIT_PASS if rep.all_pass else EXIT_FAIL


def cmd_simulate(sc: Scenario, args, out: Path) -> int:
    phi = args.phi if args.phi is not None else sc.range.midpoint
    horizon = args.horizon or sc.numerics.horizon
    traj = integrate(sc.model, ConstantHistory(phi), 0.0, horizon, args.h or sc.numerics.h)
    write_csv(out / "trajectory.csv", ["t", "x"], traj.t, traj.x)
    rep = monitor(traj, sc.model, sc.range.k, sc.range.M, transient=args.transient)
    _emit(
        [("phi", phi), ("horizon", horizon), ("x_end", float(traj.x[-1])), ("x_min", rep.x_min), ("x_max", rep.x_max),
         ("permanent", rep.permanent), ("lower_ok", rep.lower_ok), ("upper_ok", rep.upper_ok),
         ("envelope_bound", rep.envelope_bound), ("envelope_ok", rep.envelope_ok), ("csv", str(out / "trajectory.csv"))],
        out, "simulate_report.txt",
    )
    return EXIT_PASS


def cmd_solve_pap(sc: Scenario, args, out: Path) -> int:
    num = sc.numerics
    try:
        sol = picard_solve(sc.model, sc.range, num.window, num.grid_step, num.T_trunc, num.tol, args.max_iter, **sc.hypothesis_kwargs())
    except ConditionNotSatisfied as exc:
        print(f"solve-pap: {exc}", file=sys.stderr)
        return EXIT_FAIL
    write_csv(out / "pap_solution.csv", ["t", "x_star"], sol.t, sol.values)
    xcheck = crosscheck_forward(sc.model, sol, h=num.h)
    tail = sol.contraction_ratios[-3:] if sol.contraction_ratios.size else []
    _emit(
        [("iterations", sol.iterations), ("contraction_ratios_tail", [float(v) for v in tail]),
         ("contraction_bound", sol.contraction_bound), ("residual_fixed_point", sol.residual_fixed_point),
         ("residual_ode", sol.residual_ode), ("tail_bound", sol.tail_bound), ("T_trunc", sol.T_trunc),
         ("box_ok", sol.box_ok), ("x_min", float(sol.values.min())), ("x_max", float(sol.values.max())),
         ("crosscheck_forward", xcheck), ("csv", str(out / "pap_solution.csv"))],
        out, "pap_diagnostics.txt",
    )
    return EXIT_PASS if sol.box_ok else EXIT_FAIL


def cmd_stability(sc: Scenario, args, out: Path) -> int:
    pa = args.phi_a if args.phi_a is not None else sc.range.k
    pb = args.phi_b if args.phi_b is not None else sc.range.M
    cert = analysis.attractor_experiment(
        sc.model, sc.range, ConstantHistory(pa), ConstantHistory(pb),
        horizon=args.horizon or sc.numerics.horizon, h=args.h or sc.numerics.h, overrides=sc.hypothesis_kwargs(),
    )
    write_csv(out / "trajectory_a.csv", ["t", "x"], cert.traj_a.t, cert.traj_a.x)
    write_csv(out / "trajectory_b.csv", ["t", "x"], cert.traj_b.t, cert.traj_b.x)
    _emit(
        [("pair", list(cert.pair)), ("lambda_bound", cert.lambda_bound), ("M1", cert.M1), ("fitted_rate", cert.fitted_rate),
         ("envelope_pass", cert.envelope_pass), ("max_envelope_ratio", cert.max_ratio),
         ("rate_ordering_pass", cert.rate_ordering_pass), ("advisory", cert.advisory)],
        out, "stability_certificate.txt",
    )
    return EXIT_PASS if cert.envelope_pass and not cert.advisory else EXIT_FAIL


def cmd_extinction(sc: Scenario, args, out: Path) -> int:
    try:
        rep = analysis.extinction_experiment(sc.model, ConstantHistory(args.phi or 1.0), horizon=args.horizon or sc.numerics.horizon, h=args.h or sc.numerics.h)
    except ConditionNotSatisfied as exc:
        print(str(exc))
        return EXIT_FAIL
    write_csv(out / "trajectory.csv", ["t", "x"], rep.trajectory.t, rep.trajectory.x)
    _emit(
        [("lambda_G", rep.lambda_G), ("Q", rep.Q), ("envelope_pass", rep.envelope_pass), ("max_envelope_ratio", rep.max_ratio),
         ("tail_max", rep.tail_max), ("x_end", rep.x_end)],
        out, "extinction_report.txt",
    )
    return EXIT_PASS if rep.envelope_pass else EXIT_FAIL


def cmd_fig2(sc: Scenario, args, out: Path) -> int:
    horizon = args.horizon or 400.0
    res = analysis.fig2_scenario(horizon=horizon, h=args.h or 0.01)
    write_csv(out / "fig2_x0_0.1.csv", ["t", "x"], res.low.t, res.low.x)
    write_csv(out / "fig2_x0_1.csv", ["t", "x"], res.high.t, res.high.x)
    write_svg(out / "fig2.svg", [("x0 = 0.1", res.low.t, res.low.x), ("x0 = 1", res.high.t, res.high.x)])
    _emit(
        [("final_window_diff", res.final_window_diff), ("x_end_0.1", float(res.low.x[-1])), ("x_end_1", float(res.high.x[-1])),
         ("in_box_0.1", res.low_report.permanent), ("in_box_1", res.high_report.permanent),
         ("envelope_ok", res.low_report.envelope_ok and res.high_report.envelope_ok)],
        out, "fig2_report.txt",
    )
    return EXIT_PASS


COMMANDS = {
    "check": cmd_check,
    "simulate": cmd_simulate,
    "solve-pap": cmd_solve_pap,
    "stability": cmd_stability,
    "extinction": cmd_extinction,
    "fig2": cmd_fig2,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hemopap", description="Hematopoiesis model with harvesting and mixed delays")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("scenario", nargs="?", default="example6", help="scenario file or built-in name (example6, constant, extinction, decay)")
    p.add_argument("-o", "--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--horizon", type=float, help="override numerics.horizon")
    p.add_argument("--h", type=float, help="override numerics.h")
    p.add_argument("--phi", type=float, help="constant history for simulate / extinction")
    p.add_argument("--phi-a", type=float, help="first constant history for stability (default k)")
    p.add_argument("--phi-b", type=float, help="second constant history for stability (default M)")
    p.add_argument("--transient", type=float, default=0.0, help="transient excluded from the permanence check")
    p.add_argument("--max-iter", type=int, default=200, help="Picard iteration budget")
    return p


def run(command: str, scenario, out_dir, argv_args: Optional[argparse.Namespace] = None) -> int:
    """Dispatch one command; returns the exit status."""
    args = argv_args or build_parser().parse_args([command])
    out = Path(out_dir)
    try:
        sc = scenario if isinstance(scenario, Scenario) else parse_scenario(scenario)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[command](sc, args, out)
    except (HemopapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.scenario, args.out, args)


if __name__ == "__main__":
    sys.exit(main())
