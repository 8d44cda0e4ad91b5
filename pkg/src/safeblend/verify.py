"""Executable checks over trajectories and random sweeps.

Every check returns a CheckReport whose margin is a signed worst-case
slack: positive means the property held with room to spare, negative
means it was violated by that amount.  A check passes iff
margin >= -tol.  Trajectory checks are pure functions of the record
arrays (plus explicit tolerances) so a report is reproducible from a
CSV file alone; they never re-simulate.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .constraints import c_value, grad_c

PASS = "pass"
FAIL = "fail"
PRECONDITION = "precondition-violated"


@dataclasses.dataclass(frozen=True)
class CheckReport:
    name: str
    status: str
    margin: float
    location: float  # time (trajectory checks) or sample index (sweeps)
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def line(self) -> str:
        loc = f"{self.location:.6g}"
        # + 0.0 folds negative zero so the table never shows "-0"
        text = (f"{self.name:<24} {self.status:<22} "
                f"margin={self.margin + 0.0: .6g}  at={loc}  tol={self.tol:g}")
        if self.detail:
            text += f"  ({self.detail})"
        return text

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status,
                "margin": self.margin, "location": self.location,
                "tol": self.tol, "detail": self.detail}


def _verdict(margin: float, tol: float) -> str:
    return PASS if margin >= -tol else FAIL


def check_forward_invariance(traj, tol: float) -> CheckReport:
    """min_t h >= -tol, for a run that started inside the safe set."""
    name = "forward_invariance"
    if traj.h[0] < 0.0:
        return CheckReport(name, PRECONDITION, float(traj.h[0]),
                           float(traj.t[0]), tol,
                           "initial record has h < 0")
    k = int(np.argmin(traj.h))
    margin = float(traj.h[k])
    return CheckReport(name, _verdict(margin, tol), margin,
                       float(traj.t[k]), tol)


def check_velocity_bound(traj, v_bar: float, tol: float) -> CheckReport:
    """Within the safe set, ||v||^2 <= v_bar + tol."""
    name = "velocity_bound"
    inside = traj.h >= 0.0
    if not np.any(inside):
        return CheckReport(name, PASS, math.inf, float(traj.t[0]), tol,
                           "no records inside the safe set")
    v_sq = np.sum(traj.v * traj.v, axis=1)
    slack = np.where(inside, v_bar - v_sq, math.inf)
    k = int(np.argmin(slack))
    return CheckReport(name, _verdict(float(slack[k]), tol), float(slack[k]),
                       float(traj.t[k]), tol)


def _segments(mask: np.ndarray):
    """Maximal runs of consecutive True entries as (start, end) inclusive."""
    runs = []
    start = None
    for k, m in enumerate(mask):
        if m and start is None:
            start = k
        elif not m and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, mask.size - 1))
    return runs


def check_passivity(traj, tol: float) -> CheckReport:
    """On every maximal h <= 0 segment, the storage S = -h grows by at
    most the injected power integral: S(t) - S(t0) <= int v'mu dt + tol
    (trapezoidal quadrature on the record grid)."""
    name = "passivity"
    mask = traj.h <= 0.0
    runs = _segments(mask)
    if not runs:
        return CheckReport(name, PASS, math.inf, float(traj.t[0]), tol,
                           "no records outside the safe set")
    power = np.sum(traj.v * traj.mu, axis=1)
    worst = -math.inf
    worst_t = float(traj.t[0])
    for i0, i1 in runs:
        integral = 0.0
        for k in range(i0 + 1, i1 + 1):
            integral += 0.5 * (power[k - 1] + power[k]) \
                * (traj.t[k] - traj.t[k - 1])
            excess = (traj.S[k] - traj.S[i0]) - integral
            if excess > worst:
                worst = excess
                worst_t = float(traj.t[k])
        if i0 == i1 and 0.0 > worst:
            worst = 0.0
            worst_t = float(traj.t[i0])
    margin = -worst
    return CheckReport(name, _verdict(margin, tol), margin, worst_t, tol,
                       f"{len(runs)} segment(s) outside the safe set")


def check_asymptotic_return(traj, t_window: float, tol: float,
                            model=None, spec=None) -> CheckReport:
    """After the disturbance releases the system outside the safe set,
    the barrier deficit max(0, -h) settles below tol within t_window and
    stays there.

    When model and spec are provided, the hypothesis that the constraint
    gradient is nonzero along the outside-C portion of the post-release
    path is checked; a zero gradient is reported as a precondition
    violation, not a failure.
    """
    name = "asymptotic_return"
    nonzero = np.any(traj.mu != 0.0, axis=1)
    if np.any(nonzero):
        idx_off = int(np.max(np.nonzero(nonzero)[0]))
        idx_off = min(idx_off + 1, traj.t.size - 1)
    else:
        idx_off = 0
    t_off = float(traj.t[idx_off])
    if traj.h[idx_off] >= 0.0:
        return CheckReport(name, PASS, float(traj.h[idx_off]), t_off, tol,
                           "released inside the safe set; nothing to return from")
    if model is not None and spec is not None:
        for k in range(idx_off, traj.t.size):
            if traj.h[k] < 0.0:
                gnorm = float(np.linalg.norm(grad_c(spec, model, traj.q[k])))
                if gnorm <= 1e-12:
                    return CheckReport(name, PRECONDITION, 0.0,
                                       float(traj.t[k]), tol,
                                       "zero constraint gradient outside "
                                       "the safe set")
    settled = traj.t >= t_off + t_window
    if not np.any(settled):
        return CheckReport(name, FAIL, -math.inf, float(traj.t[-1]), tol,
                           "trajectory ends before the settling window")
    hw = np.where(settled, traj.h, math.inf)
    k = int(np.argmin(hw))
    margin = float(hw[k])
    return CheckReport(name, _verdict(margin, tol), margin,
                       float(traj.t[k]), tol,
                       f"release at t={t_off:.6g}")


def check_nominal_passthrough(traj) -> CheckReport:
    """Wherever the record is flagged inside the passthrough region,
    the applied torque equals the nominal torque exactly."""
    name = "nominal_passthrough"
    inside = traj.in_C_eps != 0
    if not np.any(inside):
        return CheckReport(name, PASS, math.inf, float(traj.t[0]), 0.0,
                           "no records in the passthrough region")
    diff = np.max(np.abs(traj.u - traj.u_nom), axis=1)
    diff = np.where(inside, diff, -math.inf)
    k = int(np.argmax(diff))
    margin = -float(diff[k])
    status = PASS if diff[k] == 0.0 else FAIL
    return CheckReport(name, status, margin, float(traj.t[k]), 0.0,
                       f"{int(np.sum(inside))} passthrough records")


def check_structural(model, n_samples: int = 1000, seed: int = 0,
                     spec=None, q_range=(-math.pi, math.pi),
                     v_range=(-2.0, 2.0)) -> list:
    """Randomized sweep of the structural identities the theory rests on:

    - inertia matrix symmetric positive definite;
    - v'(Mdot - 2C)v = 0 (Mdot by directional finite difference), with
      allowance 1e-6 (1 + ||v||^2) per sample;
    - analytic task Jacobian vs central finite differences (<= 1e-6);
    - analytic constraint gradient vs central differences (<= 1e-6),
      when a constraint spec is supplied.

    Returns a list of CheckReports, one per identity.
    """
    rng = np.random.default_rng(seed)
    n = model.n
    qs = rng.uniform(q_range[0], q_range[1], size=(n_samples, n))
    vs = rng.uniform(v_range[0], v_range[1], size=(n_samples, n))

    spd_margin = math.inf
    spd_loc = 0
    sym_worst = 0.0
    for k in range(n_samples):
        M = model.mass_matrix(qs[k])
        sym_worst = max(sym_worst, float(np.max(np.abs(M - M.T))))
        lam = float(np.min(np.linalg.eigvalsh(M)))
        if lam < spd_margin:
            spd_margin = lam
            spd_loc = k
    spd_status = PASS if (spd_margin > 0.0 and sym_worst <= 1e-12) else FAIL
    reports = [CheckReport("inertia_spd", spd_status, spd_margin,
                           float(spd_loc), 0.0,
                           f"max asymmetry {sym_worst:.3g}")]

    delta = 1e-6
    skew_margin = math.inf
    skew_loc = 0
    for k in range(n_samples):
        q, v = qs[k], vs[k]
        Mp = model.mass_matrix(q + delta * v)
        Mm = model.mass_matrix(q - delta * v)
        Mdot = (Mp - Mm) / (2.0 * delta)
        Cm = model.coriolis_matrix(q, v)
        expr = float(v @ (Mdot - 2.0 * Cm) @ v)
        allow = 1e-6 * (1.0 + float(v @ v))
        slack = allow - abs(expr)
        if slack < skew_margin:
            skew_margin = slack
            skew_loc = k
    reports.append(CheckReport("coriolis_skew", _verdict(skew_margin, 0.0),
                               skew_margin, float(skew_loc), 0.0,
                               "allowance 1e-6 (1 + ||v||^2)"))

    jac_margin = math.inf
    jac_loc = 0
    step = 1e-6
    for k in range(n_samples):
        q = qs[k]
        J = model.task_jacobian(q)
        Jfd = np.empty_like(J)
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            Jfd[:, j] = (model.task_position(q + e)
                         - model.task_position(q - e)) / (2.0 * step)
        slack = 1e-6 - float(np.max(np.abs(J - Jfd)))
        if slack < jac_margin:
            jac_margin = slack
            jac_loc = k
    reports.append(CheckReport("task_jacobian_fd", _verdict(jac_margin, 0.0),
                               jac_margin, float(jac_loc), 0.0,
                               "central differences, step 1e-6"))

    if spec is not None:
        grad_margin = math.inf
        grad_loc = 0
        for k in range(n_samples):
            q = qs[k]
            g = grad_c(spec, model, q)
            gfd = np.empty(n)
            for j in range(n):
                e = np.zeros(n)
                e[j] = step
                gfd[j] = (c_value(spec, model, q + e)
                          - c_value(spec, model, q - e)) / (2.0 * step)
            slack = 1e-6 - float(np.max(np.abs(g - gfd)))
            if slack < grad_margin:
                grad_margin = slack
                grad_loc = k
        reports.append(CheckReport("constraint_grad_fd",
                                   _verdict(grad_margin, 0.0), grad_margin,
                                   float(grad_loc), 0.0,
                                   "central differences, step 1e-6"))
    return reports


def report_table(reports) -> str:
    lines = [r.line() for r in reports]
    verdict = "PASS" if all(r.passed for r in reports) else "FAIL"
    lines.append(f"overall: {verdict}")
    return "\n".join(lines)
