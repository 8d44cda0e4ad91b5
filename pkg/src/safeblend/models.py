"""Analytic mechanical-system models.

Every model provides the terms of

    qdot = v
    vdot = M(q)^-1 (-C(q, v) v - F v - g(q) + u + mu)

with M symmetric positive definite, F positive definite, and C built so
that v' (Mdot - 2C) v = 0 (the skew-symmetry identity the energy
bookkeeping relies on).  Models are immutable after construction and
their evaluators are pure functions of their arguments.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import kinematics
from .errors import ModelError


@dataclasses.dataclass(frozen=True)
class JointState:
    """Generalized position/velocity pair (q, v)."""

    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        v = np.array(self.v, dtype=float)
        if q.ndim != 1 or v.ndim != 1 or q.shape != v.shape or q.size < 1:
            raise ValueError("q and v must be 1-d arrays of equal length >= 1")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise ValueError("state entries must be finite")
        q.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.q.size


def _damping_matrix(damping, n: int) -> np.ndarray:
    """Build the constant positive-semidefinite damping matrix F.

    Accepts a scalar (uniform diagonal), a length-n diagonal, or a full
    n x n matrix.
    """
    d = np.asarray(damping, dtype=float)
    if d.ndim == 0:
        F = float(d) * np.eye(n)
    elif d.ndim == 1:
        if d.size != n:
            raise ValueError("damping diagonal has wrong length")
        F = np.diag(d)
    else:
        if d.shape != (n, n):
            raise ValueError("damping matrix has wrong shape")
        F = d.copy()
    if not np.allclose(F, F.T):
        raise ValueError("damping matrix must be symmetric")
    # semidefinite is enough everywhere F appears (only v' F v >= 0 is
    # ever used), and F = 0 makes the undamped analytic cases exact
    if np.min(np.linalg.eigvalsh(F)) < 0.0:
        raise ValueError("damping matrix must be positive semidefinite")
    F.flags.writeable = False
    return F


class MechanicalModel:
    """Common evaluator interface; concrete models fill in the terms."""

    n: int
    name: str
    task_dim: int

    def mass_matrix(self, q) -> np.ndarray:
        raise NotImplementedError

    def coriolis_matrix(self, q, v) -> np.ndarray:
        raise NotImplementedError

    def gravity_vector(self, q) -> np.ndarray:
        raise NotImplementedError

    def potential_energy(self, q) -> float:
        raise NotImplementedError

    def task_position(self, q) -> np.ndarray:
        """Point x = f(q) used by task-space constraints."""
        raise NotImplementedError

    def task_jacobian(self, q) -> np.ndarray:
        """d f / d q, shape (task_dim, n)."""
        raise NotImplementedError

    @property
    def damping(self) -> np.ndarray:
        return self._F

    def kinetic_energy(self, q, v) -> float:
        v = np.asarray(v, dtype=float)
        return 0.5 * float(v @ self.mass_matrix(q) @ v)

    def total_energy(self, s: JointState) -> float:
        return self.kinetic_energy(s.q, s.v) + self.potential_energy(s.q)

    def acceleration(self, s: JointState, u, mu=None) -> np.ndarray:
        """vdot = M^-1 (-C v - F v - g + u + mu)."""
        u = np.asarray(u, dtype=float)
        rhs = (
            -self.coriolis_matrix(s.q, s.v) @ s.v
            - self._F @ s.v
            - self.gravity_vector(s.q)
            + u
        )
        if mu is not None:
            rhs = rhs + np.asarray(mu, dtype=float)
        M = self.mass_matrix(s.q)
        try:
            acc = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise ModelError(f"inertia matrix of {self.name!r} is singular") from exc
        if not np.all(np.isfinite(acc)):
            raise ModelError(f"non-finite acceleration from {self.name!r}")
        return acc

    def describe(self) -> dict:
        raise NotImplementedError


class PointMassModel(MechanicalModel):
    """Decoupled point masses: M = diag(m), C = 0, g constant.

    The simplest system satisfying the structural properties; with zero
    gravity every barrier quantity is hand-computable.
    """

    def __init__(self, mass=1.0, n=None, damping=0.1, gravity=None,
                 name="point-mass"):
        m = np.asarray(mass, dtype=float)
        if m.ndim == 0:
            if n is None:
                n = 2
            m = np.full(int(n), float(m))
        elif n is not None and m.size != int(n):
            raise ValueError("mass vector length does not match n")
        if np.any(m <= 0.0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be positive and finite")
        self.n = m.size
        self.task_dim = self.n
        self.name = name
        self.mass = m
        self.mass.flags.writeable = False
        self._M = np.diag(m)
        self._M.flags.writeable = False
        self._F = _damping_matrix(damping, self.n)
        if gravity is None:
            gvec = np.zeros(self.n)
        else:
            gvec = np.array(gravity, dtype=float)
            if gvec.shape != (self.n,):
                raise ValueError("gravity vector has wrong length")
        gvec.flags.writeable = False
        self.gravity = gvec

    def mass_matrix(self, q) -> np.ndarray:
        return self._M.copy()

    def coriolis_matrix(self, q, v) -> np.ndarray:
        return np.zeros((self.n, self.n))

    def gravity_vector(self, q) -> np.ndarray:
        return self.gravity.copy()

    def potential_energy(self, q) -> float:
        # g = dU/dq with g constant, so U = g . q
        return float(self.gravity @ np.asarray(q, dtype=float))

    def task_position(self, q) -> np.ndarray:
        return np.array(q, dtype=float)

    def task_jacobian(self, q) -> np.ndarray:
        return np.eye(self.n)

    def describe(self) -> dict:
        return {
            "kind": "point_mass",
            "mass": self.mass.tolist(),
            "damping": np.diag(self._F).tolist(),
            "gravity": self.gravity.tolist(),
        }


class TwoLinkArmModel(MechanicalModel):
    """Planar two-link arm with revolute joints (standard Christoffel form).

    Angles are measured from the +x axis (q = 0 is horizontal); gravity
    pulls along -y.  Default parameters are a desk-scale arm: unit link
    masses, half-metre links, centres of mass at mid-link, thin-rod
    inertias.
    """

    n = 2
    task_dim = 2

    def __init__(self, m1=1.0, m2=1.0, l1=0.5, l2=0.5, lc1=0.25, lc2=0.25,
                 I1=None, I2=None, g0=9.81, damping=0.1, name="two-link arm"):
        for label, val in (("m1", m1), ("m2", m2), ("l1", l1), ("l2", l2),
                           ("lc1", lc1), ("lc2", lc2)):
            if val <= 0.0:
                raise ValueError(f"{label} must be positive")
        self.m1, self.m2 = float(m1), float(m2)
        self.l1, self.l2 = float(l1), float(l2)
        self.lc1, self.lc2 = float(lc1), float(lc2)
        self.I1 = self.m1 * self.l1 ** 2 / 12.0 if I1 is None else float(I1)
        self.I2 = self.m2 * self.l2 ** 2 / 12.0 if I2 is None else float(I2)
        self.g0 = float(g0)
        self.name = name
        self._F = _damping_matrix(damping, 2)
        # inertia constants: M11 = a1 + 2 a2 cos q2, M12 = b1 + a2 cos q2,
        # M22 = b1
        self._a1 = (self.m1 * self.lc1 * self.lc1 + self.I1
                    + self.m2 * (self.l1 * self.l1 + self.lc2 * self.lc2)
                    + self.I2)
        self._a2 = self.m2 * self.l1 * self.lc2
        self._b1 = self.m2 * self.lc2 * self.lc2 + self.I2
        # gravity constants: g1 = gz1 cos q1 + gz2 cos(q1+q2), g2 = gz2 cos(q1+q2)
        self._gz1 = (self.m1 * self.lc1 + self.m2 * self.l1) * self.g0
        self._gz2 = self.m2 * self.lc2 * self.g0

    def mass_matrix(self, q) -> np.ndarray:
        c2 = math.cos(float(q[1]))
        m11 = self._a1 + 2.0 * self._a2 * c2
        m12 = self._b1 + self._a2 * c2
        return np.array([[m11, m12], [m12, self._b1]])

    def coriolis_matrix(self, q, v) -> np.ndarray:
        hf = self._a2 * math.sin(float(q[1]))
        v1, v2 = float(v[0]), float(v[1])
        return np.array([[-hf * v2, -hf * (v1 + v2)], [hf * v1, 0.0]])

    def gravity_vector(self, q) -> np.ndarray:
        c1 = math.cos(float(q[0]))
        c12 = math.cos(float(q[0]) + float(q[1]))
        return np.array([self._gz1 * c1 + self._gz2 * c12, self._gz2 * c12])

    def potential_energy(self, q) -> float:
        s1 = math.sin(float(q[0]))
        s12 = math.sin(float(q[0]) + float(q[1]))
        return self._gz1 * s1 + self._gz2 * s12

    def task_position(self, q) -> np.ndarray:
        return kinematics.planar_fk(self.l1, self.l2, q)

    def task_jacobian(self, q) -> np.ndarray:
        return kinematics.planar_jacobian(self.l1, self.l2, q)

    def describe(self) -> dict:
        return {
            "kind": "two_link",
            "m1": self.m1, "m2": self.m2, "l1": self.l1, "l2": self.l2,
            "lc1": self.lc1, "lc2": self.lc2, "I1": self.I1, "I2": self.I2,
            "g0": self.g0, "damping": np.diag(self._F).tolist(),
        }
