"""Closed-loop simulation: scenarios, RK4 integration, trajectory records.

A Scenario bundles model, constraint, barrier, nominal controller,
controller mode, disturbance profile, and grid.  simulate() lowers it to
the compiled kernel when possible (pure-Python kernel as fallback) or
runs the object-path integrator for custom models/controllers.  Either
way the result is a Trajectory: one record per step boundary with every
quantity the verification checks need, exportable to CSV.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

import numpy as np

from . import _engine, _layout
from .barrier import (BarrierConfig, h_value, hdot_exact, phi_eps)
from .constraints import EllipsoidSpec, c_value
from .controllers import (NominalController, SafeController,
                          baseline_qp_control, linear_alpha)
from .errors import ScenarioError, SimulationDiverged, TrajectoryError
from .models import JointState, MechanicalModel

BOUND = 1.0e6
MODES = ("safe", "nominal", "baseline")


@dataclasses.dataclass(frozen=True)
class DisturbanceProfile:
    """Piecewise-constant external torque: ordered, non-overlapping
    half-open windows [t_start, t_end), zero elsewhere."""

    windows: tuple = ()

    def __post_init__(self):
        norm = []
        prev_end = None
        for w in self.windows:
            t0, t1, tau = w
            t0, t1 = float(t0), float(t1)
            tau = np.array(tau, dtype=float)
            if not (t0 < t1):
                raise ScenarioError("disturbance window must have t_start < t_end")
            if prev_end is not None and t0 < prev_end:
                raise ScenarioError("disturbance windows must be ordered and "
                                    "non-overlapping")
            if tau.ndim != 1 or not np.all(np.isfinite(tau)):
                raise ScenarioError("disturbance torque must be a finite vector")
            tau.flags.writeable = False
            norm.append((t0, t1, tau))
            prev_end = t1
        object.__setattr__(self, "windows", tuple(norm))

    @classmethod
    def empty(cls) -> "DisturbanceProfile":
        return cls(())

    def value(self, t: float, n: int) -> np.ndarray:
        for t0, t1, tau in self.windows:
            if t0 <= t < t1:
                return tau.copy()
        return np.zeros(n)

    def end_time(self):
        """End of the last window, or None when there is none."""
        if not self.windows:
            return None
        return self.windows[-1][1]

    def describe(self) -> list:
        return [{"t_start": t0, "t_end": t1, "mu": tau.tolist()}
                for t0, t1, tau in self.windows]


@dataclasses.dataclass(frozen=True)
class Scenario:
    """One complete closed-loop problem on a uniform time grid."""

    name: str
    model: MechanicalModel
    spec: EllipsoidSpec
    barrier: BarrierConfig
    nominal: NominalController
    initial: JointState
    duration: float
    dt: float = 1e-3
    disturbance: DisturbanceProfile = dataclasses.field(
        default_factory=DisturbanceProfile.empty)
    mode: str = "safe"
    zoh: bool = False
    alpha_gain: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ScenarioError("dt must be positive")
        if not (self.duration >= self.dt):
            raise ScenarioError("duration must be at least one step")
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}")
        if self.initial.n != self.model.n:
            raise ScenarioError("initial state size does not match the model")
        want = self.model.task_dim if self.spec.space == "task" else self.model.n
        if self.spec.dim != want:
            raise ScenarioError("constraint dimension does not match the model")
        for _, _, tau in self.disturbance.windows:
            if tau.size != self.model.n:
                raise ScenarioError("disturbance torque size does not match "
                                    "the model")
        if not (self.alpha_gain > 0.0):
            raise ScenarioError("alpha_gain must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "model": self.model.describe(),
            "constraint": self.spec.describe(),
            "barrier": self.barrier.describe(),
            "nominal": self.nominal.describe(),
            "mode": self.mode,
            "initial": {"q": self.initial.q.tolist(),
                        "v": self.initial.v.tolist()},
            "duration": self.duration,
            "dt": self.dt,
            "zoh": self.zoh,
            "alpha_gain": self.alpha_gain,
            "seed": self.seed,
            "disturbance": self.disturbance.describe(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _columns(n: int, d: int) -> list:
    cols = ["t"]
    cols += [f"q{i}" for i in range(n)]
    cols += [f"v{i}" for i in range(n)]
    cols += [f"x{i}" for i in range(d)]
    cols += ["c", "h", "phi"]
    cols += [f"u{i}" for i in range(n)]
    cols += [f"u_nom{i}" for i in range(n)]
    cols += [f"mu{i}" for i in range(n)]
    cols += ["S", "hdot", "in_C", "in_C_eps"]
    return cols


@dataclasses.dataclass
class Trajectory:
    """Struct-of-arrays record stream on the uniform grid."""

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    x: np.ndarray
    c: np.ndarray
    h: np.ndarray
    phi: np.ndarray
    u: np.ndarray
    u_nom: np.ndarray
    mu: np.ndarray
    S: np.ndarray
    hdot: np.ndarray
    in_C: np.ndarray
    in_C_eps: np.ndarray
    infeasible: np.ndarray
    meta: dict = dataclasses.field(default_factory=dict)

    @classmethod
    def from_arrays(cls, out: dict, meta: dict) -> "Trajectory":
        return cls(meta=meta, **out)

    def __len__(self) -> int:
        return self.t.size

    @property
    def n(self) -> int:
        return self.q.shape[1]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def state(self, k: int) -> JointState:
        return JointState(self.q[k], self.v[k])

    def summary(self) -> dict:
        v_sq = np.sum(self.v * self.v, axis=1)
        u_norm = np.sqrt(np.sum(self.u * self.u, axis=1))
        k_h = int(np.argmin(self.h))
        k_c = int(np.argmin(self.c))
        return {
            "records": int(self.t.size),
            "duration": float(self.t[-1]),
            "min_h": float(self.h[k_h]),
            "t_min_h": float(self.t[k_h]),
            "min_c": float(self.c[k_c]),
            "t_min_c": float(self.t[k_c]),
            "max_v_sq": float(np.max(v_sq)),
            "frac_in_C": float(np.mean(self.in_C != 0)),
            "frac_in_C_eps": float(np.mean(self.in_C_eps != 0)),
            "max_u_norm": float(np.max(u_norm)),
            "median_u_norm": float(np.median(u_norm)),
            "final_h": float(self.h[-1]),
            "infeasible_count": int(np.sum(self.infeasible != 0)),
        }

    def to_csv(self, path) -> None:
        n, d = self.n, self.d
        cols = _columns(n, d)
        lines = [",".join(cols)]
        for k in range(self.t.size):
            vals = [f"{self.t[k]:.17g}"]
            vals += [f"{self.q[k, i]:.17g}" for i in range(n)]
            vals += [f"{self.v[k, i]:.17g}" for i in range(n)]
            vals += [f"{self.x[k, i]:.17g}" for i in range(d)]
            vals += [f"{self.c[k]:.17g}", f"{self.h[k]:.17g}",
                     f"{self.phi[k]:.17g}"]
            vals += [f"{self.u[k, i]:.17g}" for i in range(n)]
            vals += [f"{self.u_nom[k, i]:.17g}" for i in range(n)]
            vals += [f"{self.mu[k, i]:.17g}" for i in range(n)]
            vals += [f"{self.S[k]:.17g}", f"{self.hdot[k]:.17g}",
                     f"{int(self.in_C[k])}", f"{int(self.in_C_eps[k])}"]
            lines.append(",".join(vals))
        with open(path, "w") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header:
                raise TrajectoryError(f"{path}: empty trajectory file")
            names = header.split(",")
            n = sum(1 for c in names if c.startswith("q") and c[1:].isdigit())
            d = sum(1 for c in names if c.startswith("x") and c[1:].isdigit())
            if n < 1 or names != _columns(n, d):
                raise TrajectoryError(f"{path}: unexpected column layout")
            rows = []
            for ln, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                toks = line.split(",")
                if len(toks) != len(names):
                    raise TrajectoryError(f"{path}:{ln}: wrong field count")
                try:
                    rows.append([float(tok) for tok in toks])
                except ValueError as exc:
                    raise TrajectoryError(f"{path}:{ln}: {exc}") from exc
        if not rows:
            raise TrajectoryError(f"{path}: no records")
        a = np.array(rows)
        pos = 1
        def take(width):
            nonlocal pos
            block = a[:, pos:pos + width]
            pos += width
            return np.ascontiguousarray(block)
        nrec = a.shape[0]
        return cls(
            t=np.ascontiguousarray(a[:, 0]),
            q=take(n), v=take(n), x=take(d),
            c=take(1)[:, 0], h=take(1)[:, 0], phi=take(1)[:, 0],
            u=take(n), u_nom=take(n), mu=take(n),
            S=take(1)[:, 0], hdot=take(1)[:, 0],
            in_C=take(1)[:, 0].astype(np.int8),
            in_C_eps=take(1)[:, 0].astype(np.int8),
            infeasible=np.zeros(nrec, dtype=np.int8),
            meta={"source": str(path)},
        )


def rk4_step(model, controller, profile, s: JointState, t: float,
             dt: float) -> JointState:
    """One classical RK4 step of the closed loop, control and
    disturbance re-evaluated at every stage."""
    def f(ti, qi, vi):
        st = JointState(qi, vi)
        u = controller.torque(model, st, ti)
        mu = profile.value(ti, model.n) if profile is not None else None
        return vi, model.acceleration(st, u, mu)

    k1q, k1v = f(t, s.q, s.v)
    k2q, k2v = f(t + 0.5 * dt, s.q + 0.5 * dt * k1q, s.v + 0.5 * dt * k1v)
    k3q, k3v = f(t + 0.5 * dt, s.q + 0.5 * dt * k2q, s.v + 0.5 * dt * k2v)
    k4q, k4v = f(t + dt, s.q + dt * k3q, s.v + dt * k3v)
    q = s.q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
    v = s.v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return JointState(q, v)


def _rk4_step_held(model, u, profile, s: JointState, t: float,
                   dt: float) -> JointState:
    """RK4 step with the control held constant over the step."""
    def f(ti, qi, vi):
        st = JointState(qi, vi)
        mu = profile.value(ti, model.n) if profile is not None else None
        return vi, model.acceleration(st, u, mu)

    k1q, k1v = f(t, s.q, s.v)
    k2q, k2v = f(t + 0.5 * dt, s.q + 0.5 * dt * k1q, s.v + 0.5 * dt * k1v)
    k3q, k3v = f(t + 0.5 * dt, s.q + 0.5 * dt * k2q, s.v + 0.5 * dt * k2v)
    k4q, k4v = f(t + dt, s.q + dt * k3q, s.v + dt * k3v)
    q = s.q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
    v = s.v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return JointState(q, v)


class _BaselineAdapter:
    """Applies the QP projection; falls back to the raw nominal torque
    at infeasible states (reported, not raised) so a run can continue."""

    def __init__(self, cfg, spec, nominal, alpha_gain):
        self.cfg = cfg
        self.spec = spec
        self.nominal = nominal
        self.alpha = linear_alpha(alpha_gain)

    def evaluate(self, model, s, t):
        u_nom = self.nominal.torque(model, s, t)
        res = baseline_qp_control(model, self.spec, self.cfg, s, u_nom,
                                  self.alpha)
        u = res.torque if res.feasible else u_nom
        return u, u_nom, (0 if res.feasible else 1)

    def torque(self, model, s, t):
        return self.evaluate(model, s, t)[0]


class _SafeAdapter:
    def __init__(self, cfg, spec, nominal):
        self.ctrl = SafeController(cfg, spec, nominal)
        self.nominal = nominal

    def evaluate(self, model, s, t):
        return self.ctrl.torque(model, s, t), self.nominal.torque(model, s, t), 0

    def torque(self, model, s, t):
        return self.ctrl.torque(model, s, t)


class _NominalAdapter:
    def __init__(self, nominal):
        self.nominal = nominal

    def evaluate(self, model, s, t):
        u = self.nominal.torque(model, s, t)
        return u, u, 0

    def torque(self, model, s, t):
        return self.nominal.torque(model, s, t)


def _make_adapter(scn: Scenario):
    if scn.mode == "safe":
        return _SafeAdapter(scn.barrier, scn.spec, scn.nominal)
    if scn.mode == "nominal":
        return _NominalAdapter(scn.nominal)
    return _BaselineAdapter(scn.barrier, scn.spec, scn.nominal, scn.alpha_gain)


def _simulate_object(scn: Scenario) -> Trajectory:
    model, spec, cfg = scn.model, scn.spec, scn.barrier
    n_steps, dt = scn.n_steps, scn.dt
    kinds = np.zeros(_layout.N_KINDS, dtype=np.int64)
    kinds[_layout.I_N] = model.n
    kinds[_layout.I_D] = model.task_dim
    out = _layout.alloc_outputs(kinds, n_steps)
    adapter = _make_adapter(scn)
    profile = scn.disturbance
    s = scn.initial
    for k in range(n_steps + 1):
        t = k * dt
        u, u_nom, infeas = adapter.evaluate(model, s, t)
        mu = profile.value(t, model.n)
        h = h_value(model, spec, cfg, s)
        out["t"][k] = t
        out["q"][k] = s.q
        out["v"][k] = s.v
        out["x"][k] = model.task_position(s.q)
        out["c"][k] = c_value(spec, model, s.q)
        out["h"][k] = h
        out["phi"][k] = phi_eps(h, cfg)
        out["u"][k] = u
        out["u_nom"][k] = u_nom
        out["mu"][k] = mu
        out["S"][k] = -h
        out["hdot"][k] = hdot_exact(model, spec, cfg, s, u, mu)
        out["in_C"][k] = 1 if h >= 0.0 else 0
        out["in_C_eps"][k] = 1 if h >= cfg.eps else 0
        out["infeasible"][k] = infeas
        if k == n_steps:
            break
        try:
            if scn.zoh:
                s = _rk4_step_held(model, u, profile, s, t, dt)
            else:
                s = rk4_step(model, adapter, profile, s, t, dt)
        except ValueError as exc:
            raise SimulationDiverged(k + 1, (k + 1) * dt, BOUND) from exc
        if np.max(np.abs(s.q)) > BOUND or np.max(np.abs(s.v)) > BOUND:
            raise SimulationDiverged(k + 1, (k + 1) * dt, BOUND)
    meta = {"scenario": scn.describe(), "digest": scn.digest(),
            "engine": "object"}
    return Trajectory.from_arrays(out, meta)


def simulate(scn: Scenario, engine: str = "auto") -> Trajectory:
    """Run a scenario to completion and return its Trajectory.

    engine: "auto" (compiled kernel when available, falling back to the
    pure kernel, falling back to the object path for components without
    a packed form), "compiled", "pure", or "object".
    """
    if engine == "object":
        return _simulate_object(scn)
    try:
        packed = _layout.pack_problem(scn.model, scn.spec, scn.barrier,
                                      scn.mode, scn.nominal,
                                      scn.disturbance.windows, scn.zoh,
                                      scn.alpha_gain)
    except TypeError:
        if engine != "auto":
            raise
        return _simulate_object(scn)
    run, resolved = _engine.get_engine(engine)
    out = _layout.alloc_outputs(packed["kinds"], scn.n_steps)
    status = run(packed["kinds"], packed["mpar"], packed["fmat"],
                 packed["center"], packed["pmat"], packed["bpar"],
                 packed["kp"], packed["kd"], packed["refc"], packed["refa"],
                 packed["refw"], packed["refp"], packed["utau"],
                 packed["wt"], packed["wmu"],
                 np.array(scn.initial.q), np.array(scn.initial.v),
                 scn.n_steps, scn.dt,
                 out["t"], out["q"], out["v"], out["x"], out["c"], out["h"],
                 out["phi"], out["u"], out["u_nom"], out["mu"], out["S"],
                 out["hdot"], out["in_C"], out["in_C_eps"], out["infeasible"])
    if status != 0:
        raise SimulationDiverged(int(status), int(status) * scn.dt, BOUND)
    meta = {"scenario": scn.describe(), "digest": scn.digest(),
            "engine": resolved}
    return Trajectory.from_arrays(out, meta)
