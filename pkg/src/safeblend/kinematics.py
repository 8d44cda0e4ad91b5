"""Planar two-link forward kinematics and the linear Jacobian.

Joint convention: q[0] is the shoulder angle measured from the +x axis,
q[1] is the elbow angle relative to link 1.  Gravity acts along -y.
The end effector is the tip of link 2.
"""

from __future__ import annotations

import math

import numpy as np


def planar_fk(l1: float, l2: float, q) -> np.ndarray:
    """Tip position (x, y) of a planar two-link chain."""
    q1, q2 = float(q[0]), float(q[1])
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q1 + q2), math.sin(q1 + q2)
    return np.array([l1 * c1 + l2 * c12, l1 * s1 + l2 * s12])


def planar_jacobian(l1: float, l2: float, q) -> np.ndarray:
    """Linear Jacobian d(tip)/dq, so that xdot = J v.

    Finite for every q, including the folded singular configurations
    q[1] in {0, pi}; nothing downstream ever inverts it.
    """
    q1, q2 = float(q[0]), float(q[1])
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q1 + q2), math.sin(q1 + q2)
    return np.array(
        [
            [-l1 * s1 - l2 * s12, -l2 * s12],
            [l1 * c1 + l2 * c12, l2 * c12],
        ]
    )


def forward_kinematics(model, q) -> np.ndarray:
    """End-effector position of any mechanical model."""
    return model.task_position(q)


def jacobian(model, q) -> np.ndarray:
    """Linear task Jacobian of any mechanical model."""
    return model.task_jacobian(q)
