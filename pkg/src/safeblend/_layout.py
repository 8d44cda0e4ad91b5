"""Flat-array problem layout shared by the numeric engines.

Both engines (the compiled kernel and its pure-Python mirror) consume
the same packed arrays, so a closed-loop problem is lowered here once.
Only the built-in models, nominal controllers, and references can be
packed; anything else must run through the object-path integrator.
"""

from __future__ import annotations

import numpy as np

from . import barrier, constraints
from .controllers import (ConstantTorque, GravityComp, InverseDynamicsTracker,
                          SetpointReference, SinusoidReference)
from .models import PointMassModel, TwoLinkArmModel

# indices into the integer descriptor vector
I_MODEL = 0    # 0 point mass, 1 two-link arm
I_N = 1        # degrees of freedom
I_D = 2        # task-space dimension (width of the x record)
I_SPACE = 3    # constraint space: 0 joint, 1 task
I_KAPPA = 4    # blend ramp: 0 cubic, 1 linear
I_NOMINAL = 5  # 0 gravity comp, 1 inverse dynamics, 2 constant torque
I_REF = 6      # 0 setpoint, 1 sinusoid
I_MODE = 7     # 0 blended safety filter, 1 nominal only, 2 QP baseline
I_ZOH = 8      # 0 re-evaluate control at every stage, 1 hold over the step
I_NWIN = 9     # number of disturbance windows
N_KINDS = 10

MODE_SAFE = 0
MODE_NOMINAL = 1
MODE_BASELINE = 2

MODES = {"safe": MODE_SAFE, "nominal": MODE_NOMINAL, "baseline": MODE_BASELINE}

# barrier parameter slots
B_KH = 0
B_EPS = 1
B_ALPHA = 2


def _f(x) -> np.ndarray:
    # fresh writable copy: several sources are frozen arrays, and the
    # kernels take plain (non-const) memoryviews
    return np.ascontiguousarray(np.array(x, dtype=float).ravel())


def pack_problem(model, spec, cfg, mode, nominal, windows, zoh,
                 alpha_gain: float = 1.0) -> dict:
    """Lower a closed-loop problem to the flat arrays the engines take.

    windows is a sequence of (t_start, t_end, torque) triples; raises
    TypeError when any piece has no packed representation.
    """
    kinds = np.zeros(N_KINDS, dtype=np.int64)
    n = model.n
    kinds[I_N] = n
    kinds[I_D] = model.task_dim

    if isinstance(model, PointMassModel):
        kinds[I_MODEL] = 0
        mpar = np.concatenate([model.mass, model.gravity])
    elif isinstance(model, TwoLinkArmModel):
        kinds[I_MODEL] = 1
        mpar = np.array([model._a1, model._a2, model._b1,
                         model._gz1, model._gz2, model.l1, model.l2])
    else:
        raise TypeError(f"model {type(model).__name__} has no packed form")

    kinds[I_SPACE] = 1 if spec.space == constraints.TASK else 0
    kinds[I_KAPPA] = 0 if cfg.kappa == barrier.CUBIC else 1
    if mode not in MODES:
        raise TypeError(f"unknown mode {mode!r}")
    kinds[I_MODE] = MODES[mode]
    kinds[I_ZOH] = 1 if zoh else 0

    kp = np.zeros(n)
    kd = np.zeros(n)
    refc = np.zeros(n)
    refa = np.zeros(n)
    refw = np.zeros(n)
    refp = np.zeros(n)
    utau = np.zeros(n)
    if isinstance(nominal, GravityComp):
        kinds[I_NOMINAL] = 0
    elif isinstance(nominal, InverseDynamicsTracker):
        kinds[I_NOMINAL] = 1
        kp[:] = nominal.kp if nominal.kp.size == n else nominal.kp[0]
        kd[:] = nominal.kd if nominal.kd.size == n else nominal.kd[0]
        ref = nominal.reference
        if isinstance(ref, SetpointReference):
            kinds[I_REF] = 0
            refc[:] = ref.q_d
        elif isinstance(ref, SinusoidReference):
            kinds[I_REF] = 1
            refc[:] = ref.center
            refa[:] = ref.amplitude
            refw[:] = ref.omega
            refp[:] = ref.phase
        else:
            raise TypeError(f"reference {type(ref).__name__} has no packed form")
    elif isinstance(nominal, ConstantTorque):
        kinds[I_NOMINAL] = 2
        if nominal.tau.size != n:
            raise TypeError("constant torque length does not match the model")
        utau[:] = nominal.tau
    else:
        raise TypeError(f"controller {type(nominal).__name__} has no packed form")

    wins = list(windows)
    kinds[I_NWIN] = len(wins)
    wt = np.zeros(2 * len(wins))
    wmu = np.zeros(len(wins) * n)
    for w, (t0, t1, tau) in enumerate(wins):
        wt[2 * w] = float(t0)
        wt[2 * w + 1] = float(t1)
        tau = _f(tau)
        if tau.size != n:
            raise TypeError("disturbance torque length does not match the model")
        wmu[w * n:(w + 1) * n] = tau

    return {
        "kinds": kinds,
        "mpar": _f(mpar),
        "fmat": _f(model.damping),
        "center": _f(spec.center),
        "pmat": _f(spec.P),
        "bpar": np.array([cfg.k_h, cfg.eps, float(alpha_gain)]),
        "kp": kp, "kd": kd,
        "refc": refc, "refa": refa, "refw": refw, "refp": refp,
        "utau": utau,
        "wt": wt, "wmu": wmu,
    }


def alloc_outputs(kinds: np.ndarray, n_steps: int) -> dict:
    """Allocate the record arrays one run fills (n_steps + 1 rows)."""
    n = int(kinds[I_N])
    d = int(kinds[I_D])
    nrec = n_steps + 1
    return {
        "t": np.zeros(nrec),
        "q": np.zeros((nrec, n)),
        "v": np.zeros((nrec, n)),
        "x": np.zeros((nrec, d)),
        "c": np.zeros(nrec),
        "h": np.zeros(nrec),
        "phi": np.zeros(nrec),
        "u": np.zeros((nrec, n)),
        "u_nom": np.zeros((nrec, n)),
        "mu": np.zeros((nrec, n)),
        "S": np.zeros(nrec),
        "hdot": np.zeros(nrec),
        "in_C": np.zeros(nrec, dtype=np.int8),
        "in_C_eps": np.zeros(nrec, dtype=np.int8),
        "infeasible": np.zeros(nrec, dtype=np.int8),
    }
