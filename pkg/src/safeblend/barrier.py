"""Energy-based barrier h, the blending function, and set predicates.

    h(q, v) = k_h c(q) - 0.5 v' M(q) v

h >= 0 defines the safe set C; h >= eps the inner set where the nominal
controller passes through untouched.  The blend

    phi(h) = 1 (h > eps), kappa(h) (0 <= h <= eps), 0 (h < 0)

is continuous, with kappa any Lipschitz curve from 0 to 1 on [0, eps];
the cubic smoothstep is the default, a linear ramp is available.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .constraints import EllipsoidSpec, c_value, grad_c
from .models import JointState

CUBIC = "cubic"
LINEAR = "linear"


@dataclasses.dataclass(frozen=True)
class BarrierConfig:
    """Everything parameterizing h and the blend."""

    k_h: float
    eps: float = 0.1
    kappa: str = CUBIC
    v_bar: float = 1.0

    def __post_init__(self):
        if not (self.k_h > 0.0):
            raise ValueError("k_h must be positive")
        if not (self.eps > 0.0):
            raise ValueError("eps must be positive")
        if self.kappa not in (CUBIC, LINEAR):
            raise ValueError(f"kappa must be {CUBIC!r} or {LINEAR!r}")
        if not (self.v_bar > 0.0):
            raise ValueError("v_bar must be positive")

    def describe(self) -> dict:
        return {"k_h": self.k_h, "eps": self.eps, "kappa": self.kappa,
                "v_bar": self.v_bar}


def kappa_cubic(h: float, eps: float) -> float:
    """Smoothstep -(2/eps^3) h^3 + (3/eps^2) h^2 on [0, eps].

    Exactly 0 at h = 0 and exactly 1 at h = eps (the two ratios cancel
    bitwise), so the blend branches join without a jump.
    """
    hh = h * h
    return 3.0 * hh / (eps * eps) - 2.0 * (hh * h) / (eps * eps * eps)


def kappa_linear(h: float, eps: float) -> float:
    """Linear ramp h/eps on [0, eps]."""
    return h / eps


def kappa_value(h: float, eps: float, kind: str) -> float:
    if kind == CUBIC:
        return kappa_cubic(h, eps)
    if kind == LINEAR:
        return kappa_linear(h, eps)
    raise ValueError(f"unknown kappa kind {kind!r}")


def phi_eps(h: float, cfg: BarrierConfig) -> float:
    """Blend weight on the nominal controller: 0 outside C, 1 above eps."""
    if h > cfg.eps:
        return 1.0
    if h < 0.0:
        return 0.0
    return kappa_value(h, cfg.eps, cfg.kappa)


def h_value(model, spec: EllipsoidSpec, cfg: BarrierConfig, s: JointState) -> float:
    """k_h c(q) - 0.5 v' M(q) v, computed fresh from the state."""
    ke = 0.5 * float(s.v @ model.mass_matrix(s.q) @ s.v)
    return cfg.k_h * c_value(spec, model, s.q) - ke


def in_safe_set(model, spec, cfg, s: JointState) -> bool:
    """h >= 0."""
    return h_value(model, spec, cfg, s) >= 0.0


def in_C_eps(model, spec, cfg, s: JointState) -> bool:
    """h >= eps (nominal passthrough region)."""
    return h_value(model, spec, cfg, s) >= cfg.eps


def hdot_exact(model, spec, cfg, s: JointState, u, mu=None) -> float:
    """Time derivative of h along the closed loop:

        hdot = v' (k_h grad_c + g - u - mu + F v)

    The Coriolis and inertia-rate terms cancel through the skew-symmetry
    identity, which is what makes this closed form exact.  mu is the
    external torque (zero when omitted).
    """
    u = np.asarray(u, dtype=float)
    w = (cfg.k_h * grad_c(spec, model, s.q) + model.gravity_vector(s.q) - u
         + model.damping @ s.v)
    if mu is not None:
        w = w - np.asarray(mu, dtype=float)
    return float(s.v @ w)


def hdot_lower_bound(model, spec, cfg, s: JointState, u) -> float:
    """v' (k_h grad_c + g - u); a lower bound on hdot since v' F v >= 0."""
    u = np.asarray(u, dtype=float)
    w = cfg.k_h * grad_c(spec, model, s.q) + model.gravity_vector(s.q) - u
    return float(s.v @ w)
