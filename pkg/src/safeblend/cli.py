"""Command-line entry point.

Subcommands:
  simulate   run a scenario file, write the trajectory CSV, print a summary
  calibrate  estimate the gain bound on a sampled joint box and check k_h
  verify     run the trajectory checks on a CSV (tolerances from the
             scenario file when given)
  baseline   run a scenario under both the blended controller and the QP
             baseline and print a comparison, including the shrinking-
             velocity probe of the baseline's closed form

Exit codes: 0 success / all checks pass, 1 check failure, 2 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .config import default_tolerances, load_scenario
from .constraints import JointBoxSampler, calibrate, grad_c
from .controllers import baseline_qp_control, linear_alpha
from .errors import SafeblendError
from .models import JointState
from .simulate import Trajectory, simulate
from .verify import (check_asymptotic_return, check_forward_invariance,
                     check_nominal_passthrough, check_passivity,
                     check_structural, check_velocity_bound, report_table)


def _overrides(args) -> dict:
    return {"dt": getattr(args, "dt", None),
            "seed": getattr(args, "seed", None),
            "zoh": getattr(args, "zoh", None)}


def _print_summary(traj: Trajectory, mode: str) -> None:
    s = traj.summary()
    print(f"records: {s['records']}   duration: {s['duration']:g} s")
    print(f"min h: {s['min_h']:.6g}  at t = {s['t_min_h']:g} s")
    print(f"min c: {s['min_c']:.6g}  at t = {s['t_min_c']:g} s")
    print(f"max ||v||^2: {s['max_v_sq']:.6g}")
    print(f"fraction of time in passthrough region: {s['frac_in_C_eps']:.4f}")
    if mode == "baseline":
        print(f"infeasible control evaluations: {s['infeasible_count']}")


def cmd_simulate(args) -> int:
    loaded = load_scenario(args.scenario, _overrides(args))
    scn = loaded.scenario
    traj = simulate(scn, engine=args.engine)
    out = args.out or loaded.output or f"{scn.name}.csv"
    traj.to_csv(out)
    print(f"scenario: {scn.name}  (mode {scn.mode}, "
          f"engine {traj.meta['engine']})")
    _print_summary(traj, scn.mode)
    print(f"wrote trajectory: {out}")
    return 0


def cmd_calibrate(args) -> int:
    loaded = load_scenario(args.scenario, _overrides(args))
    scn = loaded.scenario
    cal = loaded.calibration or {}
    n = scn.model.n
    lo = cal.get("box_lo", [-np.pi] * n)
    hi = cal.get("box_hi", [np.pi] * n)
    sampler = JointBoxSampler(lo, hi, n_samples=cal.get("n_samples", 100_000),
                              seed=scn.seed)
    result = calibrate(scn.model, scn.spec, scn.barrier.v_bar,
                       scn.barrier.k_h, sampler)
    print(f"scenario: {scn.name}")
    print(result.report())
    return 0 if result.admissible else 1


def cmd_verify(args) -> int:
    traj = Trajectory.from_csv(args.trajectory)
    model = spec = None
    if args.scenario:
        loaded = load_scenario(args.scenario, _overrides(args))
        scn = loaded.scenario
        tol = loaded.tolerances
        model, spec = scn.model, scn.spec
    else:
        tol = default_tolerances(zoh=False)
    reports = [
        check_forward_invariance(traj, tol["invariance"]),
        check_nominal_passthrough(traj),
        check_passivity(traj, tol["passivity"]),
        check_asymptotic_return(traj, tol["return_window"],
                                tol["return_tol"], model=model, spec=spec),
    ]
    if model is not None:
        reports.append(check_velocity_bound(traj, scn.barrier.v_bar,
                                            tol["velocity"]))
        reports.extend(check_structural(model, n_samples=1000,
                                        seed=scn.seed, spec=spec))
    print(f"trajectory: {args.trajectory}  ({len(traj)} records)")
    print(report_table(reports))
    return 0 if all(r.passed for r in reports) else 1


def _probe_direction(w: np.ndarray, u_nom: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to w, signed so the projection correction
    (which points along -v) adds constructively to the nominal torque."""
    n = w.size
    wn = float(np.linalg.norm(w))
    if wn < 1e-12:
        v = np.zeros(n)
        v[0] = 1.0
    else:
        what = w / wn
        e = np.zeros(n)
        e[int(np.argmin(np.abs(what)))] = 1.0
        v = e - float(e @ what) * what
        v = v / float(np.linalg.norm(v))
    if float(v @ u_nom) > 0.0:
        v = -v
    return v


def _baseline_probe(scn, traj: Trajectory) -> str:
    """Evaluate the baseline closed form at the worst recorded
    configuration with shrinking speeds: the torque grows like 1/||v||
    and the rest state is infeasible."""
    k = int(np.argmin(traj.c))
    if traj.c[k] >= 0.0:
        return "probe skipped: the run never left the position constraint set"
    model, spec, cfg = scn.model, scn.spec, scn.barrier
    alpha = linear_alpha(scn.alpha_gain)
    q = traj.q[k]
    t = float(traj.t[k])
    rest = JointState(q, np.zeros(traj.n))
    u_nom0 = scn.nominal.torque(model, rest, t)
    w = cfg.k_h * grad_c(spec, model, q) + model.gravity_vector(q) - u_nom0
    vhat = _probe_direction(w, u_nom0)
    lines = [f"baseline closed form at the worst configuration "
             f"(t = {t:g} s, c = {traj.c[k]:.4g}):",
             f"  {'||v||':>8}  {'||u||':>12}  feasible"]
    for s in (1e-1, 1e-2, 1e-3):
        st = JointState(q, s * vhat)
        u_nom = scn.nominal.torque(model, st, t)
        res = baseline_qp_control(model, spec, cfg, st, u_nom, alpha)
        unorm = float(np.linalg.norm(res.torque))
        lines.append(f"  {s:8.0e}  {unorm:12.4f}  yes")
    res0 = baseline_qp_control(model, spec, cfg, rest, u_nom0, alpha)
    state = "yes" if res0.feasible else "NO (no torque satisfies the constraint)"
    lines.append(f"  {0.0:8.0e}  {'-':>12}  {state}")
    return "\n".join(lines)


def cmd_baseline(args) -> int:
    loaded = load_scenario(args.scenario, _overrides(args))
    scn = loaded.scenario
    safe_traj = simulate(dataclasses.replace(scn, mode="safe"),
                         engine=args.engine)
    base_traj = simulate(dataclasses.replace(scn, mode="baseline"),
                         engine=args.engine)
    if args.out:
        base_traj.to_csv(args.out)
    ss, sb = safe_traj.summary(), base_traj.summary()
    print(f"scenario: {scn.name}")
    print(f"{'':24}{'blended':>14}{'baseline QP':>14}")
    for label, key in (("min h", "min_h"), ("min c", "min_c"),
                       ("max ||v||^2", "max_v_sq"),
                       ("peak ||u||", "max_u_norm"),
                       ("median ||u||", "median_u_norm")):
        print(f"{label:<24}{ss[key]:>14.6g}{sb[key]:>14.6g}")
    print(f"{'infeasible records':<24}{ss['infeasible_count']:>14d}"
          f"{sb['infeasible_count']:>14d}")
    print(_baseline_probe(scn, base_traj))
    if args.out:
        print(f"wrote baseline trajectory: {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safeblend",
        description="Energy-barrier safety filter: simulate, calibrate, "
                    "verify, and compare against the QP baseline.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", required=scenario_required,
                       help="scenario JSON file")
        p.add_argument("--dt", type=float, help="override the time step (s)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--zoh", action="store_true", default=None,
                       help="hold the control over each step instead of "
                            "re-evaluating it at every integrator stage")

    p = sub.add_parser("simulate", help="run a scenario and write its CSV")
    common(p)
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--engine", default="auto",
                   choices=("auto", "compiled", "pure", "object"))
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("calibrate",
                       help="estimate the admissible barrier gain")
    common(p)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("verify", help="run trajectory checks on a CSV")
    p.add_argument("trajectory", help="trajectory CSV file")
    common(p, scenario_required=False)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("baseline",
                       help="compare the blended controller with the QP "
                            "baseline on one scenario")
    common(p)
    p.add_argument("--out", help="baseline trajectory CSV path")
    p.add_argument("--engine", default="auto",
                   choices=("auto", "compiled", "pure", "object"))
    p.set_defaults(fn=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SafeblendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
