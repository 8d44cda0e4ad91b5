"""Position constraint c(q), its gradient, and the gain calibration.

The constraint set is Q = {q : c(q) >= 0} with the ellipsoidal form

    c(q) = 1 - (p - x0)' P (p - x0),   p = f(q) (task space) or p = q,

whose gradient in joint coordinates is -2 J' P (p - x0); no Jacobian
inverse appears anywhere, so the machinery stays finite at kinematic
singularities.  The gain bound

    k_h <= mu1 * v_bar / (2 * cbar)

ties the barrier gain to the velocity limit: any state with nonnegative
barrier value then lies inside both the position set Q and the velocity
set {v : ||v||^2 <= v_bar}.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import ConstraintError

TASK = "task"
JOINT = "joint"


@dataclasses.dataclass(frozen=True)
class EllipsoidSpec:
    """Ellipsoidal constraint geometry: centre, SPD shape matrix, space tag."""

    center: np.ndarray
    P: np.ndarray
    space: str = TASK

    def __post_init__(self):
        center = np.array(self.center, dtype=float)
        P = np.array(self.P, dtype=float)
        if self.space not in (TASK, JOINT):
            raise ConstraintError(f"space must be {TASK!r} or {JOINT!r}")
        if center.ndim != 1 or P.shape != (center.size, center.size):
            raise ConstraintError("center and P have incompatible shapes")
        if not np.allclose(P, P.T):
            raise ConstraintError("P must be symmetric")
        if np.min(np.linalg.eigvalsh(P)) <= 0.0:
            raise ConstraintError("P must be positive definite")
        center.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "P", P)

    @property
    def dim(self) -> int:
        return self.center.size

    def describe(self) -> dict:
        return {"space": self.space, "center": self.center.tolist(),
                "P": self.P.tolist()}


@dataclasses.dataclass(frozen=True)
class VelocityBound:
    """Squared-speed limit ||v||^2 <= v_bar."""

    v_bar: float

    def __post_init__(self):
        if not (self.v_bar > 0.0):
            raise ValueError("v_bar must be positive")


def _point(spec: EllipsoidSpec, model, q) -> np.ndarray:
    if spec.space == TASK:
        return model.task_position(q)
    return np.asarray(q, dtype=float)


def c_value(spec: EllipsoidSpec, model, q) -> float:
    """c(q) = 1 - (p - x0)' P (p - x0)."""
    d = _point(spec, model, q) - spec.center
    return 1.0 - float(d @ spec.P @ d)


def grad_c(spec: EllipsoidSpec, model, q) -> np.ndarray:
    """Joint-space gradient of c; task space uses -2 J' P (f(q) - x0)."""
    d = _point(spec, model, q) - spec.center
    w = spec.P @ d
    if spec.space == TASK:
        return -2.0 * (model.task_jacobian(q).T @ w)
    return -2.0 * w


@dataclasses.dataclass(frozen=True)
class JointBoxSampler:
    """Seeded uniform sampling over a joint box enclosing Q (reproducible)."""

    lo: np.ndarray
    hi: np.ndarray
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError("need lo < hi elementwise, equal lengths")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def sample(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.lo, self.hi, size=(self.n_samples, self.lo.size))


def estimate_mu1(model, sampler: JointBoxSampler, margin: float = 0.05) -> float:
    """Lower bound on the inertia spectrum over the sampled joint range.

    Sampling cannot certify the true minimum, so the sampled minimum is
    shrunk by the margin (default 5%) to stay on the safe side of the
    gain bound.
    """
    qs = sampler.sample()
    M = np.stack([model.mass_matrix(q) for q in qs])
    lam_min = float(np.min(np.linalg.eigvalsh(M)[:, 0]))
    if lam_min <= 0.0:
        raise ConstraintError("sampled inertia matrix is not positive definite")
    return (1.0 - margin) * lam_min


def estimate_cbar(spec: EllipsoidSpec, model, sampler: JointBoxSampler) -> float:
    """Maximum of c over Q, estimated on the sampled joint box.

    For the ellipsoidal form c <= 1 everywhere, so the sampled maximum is
    clamped by that analytic bound.  Fails if no sample lands inside Q.
    """
    qs = sampler.sample()
    cs = np.array([c_value(spec, model, q) for q in qs])
    inside = cs >= 0.0
    if not np.any(inside):
        raise ConstraintError("no sample lies in Q; check the sampler box")
    return min(1.0, float(np.max(cs[inside])))


def max_kh(mu1: float, v_bar: float, cbar: float) -> float:
    """Largest admissible barrier gain, mu1 * v_bar / (2 * cbar)."""
    if mu1 <= 0.0 or v_bar <= 0.0 or cbar <= 0.0:
        raise ValueError("mu1, v_bar, cbar must all be positive")
    return mu1 * v_bar / (2.0 * cbar)


@dataclasses.dataclass(frozen=True)
class GainCalibration:
    """Result of calibrating the barrier gain against the velocity bound."""

    mu1: float
    cbar: float
    v_bar: float
    k_h_max: float
    k_h: float

    @property
    def admissible(self) -> bool:
        return 0.0 < self.k_h <= self.k_h_max

    def as_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "cbar": self.cbar,
            "v_bar": self.v_bar,
            "k_h_max": self.k_h_max,
            "k_h": self.k_h,
            "admissible": self.admissible,
        }

    def report(self) -> str:
        lines = [
            "gain calibration",
            f"  inertia lower bound  mu1    = {self.mu1:.6g}",
            f"  constraint maximum   cbar   = {self.cbar:.6g}",
            f"  velocity bound       v_bar  = {self.v_bar:.6g}",
            f"  admissible gain      k_h_max= {self.k_h_max:.6g}",
            f"  configured gain      k_h    = {self.k_h:.6g}",
            f"  admissible: {'yes' if self.admissible else 'NO'}",
        ]
        return "\n".join(lines)


def calibrate(model, spec: EllipsoidSpec, v_bar, k_h: float,
              sampler: JointBoxSampler) -> GainCalibration:
    """Estimate mu1 and cbar on the sampler box and check k_h admissibility."""
    if isinstance(v_bar, VelocityBound):
        v_bar = v_bar.v_bar
    mu1 = estimate_mu1(model, sampler)
    cbar = estimate_cbar(spec, model, sampler)
    return GainCalibration(mu1=mu1, cbar=cbar, v_bar=float(v_bar),
                           k_h_max=max_kh(mu1, float(v_bar), cbar), k_h=float(k_h))
