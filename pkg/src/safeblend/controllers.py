"""Nominal controllers, the blended safety controller, and the QP baseline.

The safety controller is the closed form

    u = (1 - phi(h)) (g(q) + k_h grad_c(q)) + phi(h) u_nom(q, v, t)

which is total: it returns a finite torque for every finite state, with
no optimization and no Jacobian inversion.  The baseline is the classic
barrier QP

    argmin ||u - u_nom||^2  s.t.  v'(k_h grad_c + g - u) >= -alpha(h)

whose single-constraint projection has a closed form, but which is
infeasible at rest outside the safe set and blows up as ||v|| -> 0.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from .barrier import BarrierConfig, h_value, phi_eps
from .constraints import EllipsoidSpec, grad_c
from .models import JointState, MechanicalModel


class Reference:
    """Joint-space reference trajectory: position, velocity, acceleration."""

    def eval(self, t: float):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class SetpointReference(Reference):
    """Constant target configuration."""

    q_d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q_d", np.array(self.q_d, dtype=float))

    def eval(self, t: float):
        z = np.zeros_like(self.q_d)
        return self.q_d.copy(), z, z.copy()

    def describe(self) -> dict:
        return {"kind": "setpoint", "q_d": self.q_d.tolist()}


@dataclasses.dataclass(frozen=True)
class SinusoidReference(Reference):
    """Per-joint sinusoid q_d = center + amp * sin(omega t + phase)."""

    center: np.ndarray
    amplitude: np.ndarray
    omega: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        arrs = {}
        for name in ("center", "amplitude", "omega", "phase"):
            arrs[name] = np.array(getattr(self, name), dtype=float)
        sizes = {a.size for a in arrs.values()}
        if len(sizes) != 1:
            raise ValueError("reference parameter lengths differ")
        for name, a in arrs.items():
            object.__setattr__(self, name, a)

    def eval(self, t: float):
        n = self.center.size
        qd = np.empty(n)
        vd = np.empty(n)
        ad = np.empty(n)
        for j in range(n):
            arg = self.omega[j] * t + self.phase[j]
            s, c = math.sin(arg), math.cos(arg)
            qd[j] = self.center[j] + self.amplitude[j] * s
            vd[j] = self.amplitude[j] * self.omega[j] * c
            ad[j] = -self.amplitude[j] * self.omega[j] * self.omega[j] * s
        return qd, vd, ad

    def describe(self) -> dict:
        return {"kind": "sinusoid", "center": self.center.tolist(),
                "amplitude": self.amplitude.tolist(),
                "omega": self.omega.tolist(), "phase": self.phase.tolist()}


class NominalController:
    """Any torque law u_nom(q, v, t); must be locally Lipschitz in state."""

    def torque(self, model: MechanicalModel, s: JointState, t: float) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class GravityComp(NominalController):
    """u_nom = g(q)."""

    def torque(self, model, s, t):
        return model.gravity_vector(s.q)

    def describe(self) -> dict:
        return {"kind": "gravity_comp"}


@dataclasses.dataclass(frozen=True)
class ConstantTorque(NominalController):
    tau: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", np.array(self.tau, dtype=float))

    def torque(self, model, s, t):
        return self.tau.copy()

    def describe(self) -> dict:
        return {"kind": "constant", "tau": self.tau.tolist()}


@dataclasses.dataclass(frozen=True)
class InverseDynamicsTracker(NominalController):
    """u = M (a_d + Kp e + Kd edot) + C v + F v + g, with e = q_d - q.

    Diagonal gains; defaults are a stiff, near-critically-damped pair for
    unit inertia.
    """

    reference: Reference
    kp: np.ndarray = 100.0
    kd: np.ndarray = 20.0

    def __post_init__(self):
        object.__setattr__(self, "kp", np.atleast_1d(np.asarray(self.kp, dtype=float)))
        object.__setattr__(self, "kd", np.atleast_1d(np.asarray(self.kd, dtype=float)))

    def torque(self, model, s, t):
        qd, vd, ad = self.reference.eval(t)
        kp = self.kp if self.kp.size == s.n else np.full(s.n, self.kp[0])
        kd = self.kd if self.kd.size == s.n else np.full(s.n, self.kd[0])
        a = ad + kp * (qd - s.q) + kd * (vd - s.v)
        return (model.mass_matrix(s.q) @ a
                + model.coriolis_matrix(s.q, s.v) @ s.v
                + model.damping @ s.v
                + model.gravity_vector(s.q))

    def describe(self) -> dict:
        return {"kind": "inverse_dynamics", "kp": self.kp.tolist(),
                "kd": self.kd.tolist(), "reference": self.reference.describe()}


def nominal_gravity_comp(model, s: JointState) -> np.ndarray:
    """Convenience: the gravity-compensation torque g(q)."""
    return model.gravity_vector(s.q)


@dataclasses.dataclass(frozen=True)
class SafeController:
    """The blended controller; total and continuous in (q, v, t)."""

    cfg: BarrierConfig
    spec: EllipsoidSpec
    nominal: NominalController

    def torque(self, model, s: JointState, t: float) -> np.ndarray:
        # Branch before any blending arithmetic so that u == u_nom holds
        # bit-exactly in the passthrough region and u == g + k_h grad_c
        # holds exactly outside the safe set.
        h = h_value(model, self.spec, self.cfg, s)
        if h >= self.cfg.eps:
            return self.nominal.torque(model, s, t)
        safe = (model.gravity_vector(s.q)
                + self.cfg.k_h * grad_c(self.spec, model, s.q))
        if h < 0.0:
            return safe
        phi = phi_eps(h, self.cfg)
        return (1.0 - phi) * safe + phi * self.nominal.torque(model, s, t)

    def describe(self) -> dict:
        return {"kind": "safe", "barrier": self.cfg.describe(),
                "constraint": self.spec.describe(),
                "nominal": self.nominal.describe()}


def in_Ku(model, spec, cfg, s: JointState, u, atol: float = 0.0) -> bool:
    """Membership in the admissible set: v'(k_h grad_c + g - u) >= 0.

    atol admits a tolerance for states constructed only approximately on
    the boundary; the default is the exact inequality.
    """
    u = np.asarray(u, dtype=float)
    w = cfg.k_h * grad_c(spec, model, s.q) + model.gravity_vector(s.q) - u
    return float(s.v @ w) >= -atol


@dataclasses.dataclass(frozen=True)
class QPResult:
    """Outcome of the baseline filter.  torque is None iff infeasible."""

    feasible: bool
    torque: Optional[np.ndarray]
    slack: float  # constraint slack at u_nom: v'(k_h grad_c + g - u_nom) + alpha(h)
    h: float

    def __bool__(self) -> bool:
        return self.feasible


def linear_alpha(gain: float = 1.0) -> Callable[[float], float]:
    """Extended class-K function alpha(h) = gain * h."""
    if gain <= 0.0:
        raise ValueError("alpha gain must be positive")
    return lambda h: gain * h


def baseline_qp_control(model, spec, cfg, s: JointState, u_nom,
                        alpha: Optional[Callable[[float], float]] = None) -> QPResult:
    """Closed form of the single-constraint barrier QP.

    With z = v'(k_h grad_c + g - u_nom) + alpha(h):
      z >= 0        -> u = u_nom (constraint inactive)
      z < 0, v != 0 -> u = u_nom + (z / ||v||^2) v (half-space projection)
      z < 0, v == 0 -> infeasible: no torque can satisfy the constraint
                       at rest outside the safe set.
    """
    if alpha is None:
        alpha = linear_alpha(1.0)
    u_nom = np.asarray(u_nom, dtype=float)
    h = h_value(model, spec, cfg, s)
    w = cfg.k_h * grad_c(spec, model, s.q) + model.gravity_vector(s.q)
    z = float(s.v @ (w - u_nom)) + float(alpha(h))
    if z >= 0.0:
        return QPResult(feasible=True, torque=u_nom.copy(), slack=z, h=h)
    vsq = float(s.v @ s.v)
    if vsq == 0.0:
        return QPResult(feasible=False, torque=None, slack=z, h=h)
    return QPResult(feasible=True, torque=u_nom + (z / vsq) * s.v, slack=z, h=h)
