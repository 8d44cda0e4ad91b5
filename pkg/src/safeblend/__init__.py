"""Safe, passive blending of nominal controllers for mechanical systems.

The controller keeps an energy-based barrier

    h(q, v) = k_h c(q) - 0.5 v' M(q) v

nonnegative by blending the nominal torque with the closed-form safe
torque g(q) + k_h grad_c(q); no optimization runs online and the law is
defined at every state.  The package bundles analytic manipulator
models, the gain calibration tying k_h to a velocity bound, a fixed-step
closed-loop simulator (compiled kernel with a pure-Python fallback),
trajectory checks for the invariance/passivity/return properties, and a
scenario-driven CLI.
"""

from ._engine import COMPILED_AVAILABLE
from .barrier import (BarrierConfig, h_value, hdot_exact, hdot_lower_bound,
                      in_C_eps, in_safe_set, kappa_cubic, kappa_linear,
                      phi_eps)
from .constraints import (EllipsoidSpec, GainCalibration, JointBoxSampler,
                          VelocityBound, c_value, calibrate, estimate_cbar,
                          estimate_mu1, grad_c, max_kh)
from .controllers import (ConstantTorque, GravityComp, InverseDynamicsTracker,
                          QPResult, SafeController, SetpointReference,
                          SinusoidReference, baseline_qp_control, in_Ku,
                          linear_alpha)
from .errors import (ConstraintError, ModelError, SafeblendError,
                     ScenarioError, SimulationDiverged, TrajectoryError)
from .models import (JointState, MechanicalModel, PointMassModel,
                     TwoLinkArmModel)
from .simulate import (DisturbanceProfile, Scenario, Trajectory, rk4_step,
                       simulate)
from .verify import (CheckReport, check_asymptotic_return,
                     check_forward_invariance, check_nominal_passthrough,
                     check_passivity, check_structural, check_velocity_bound,
                     report_table)

__version__ = "0.1.0"

__all__ = [
    "COMPILED_AVAILABLE", "BarrierConfig", "h_value", "hdot_exact",
    "hdot_lower_bound", "in_C_eps", "in_safe_set", "kappa_cubic",
    "kappa_linear", "phi_eps", "EllipsoidSpec", "GainCalibration",
    "JointBoxSampler", "VelocityBound", "c_value", "calibrate",
    "estimate_cbar", "estimate_mu1", "grad_c", "max_kh", "ConstantTorque",
    "GravityComp", "InverseDynamicsTracker", "QPResult", "SafeController",
    "SetpointReference", "SinusoidReference", "baseline_qp_control", "in_Ku",
    "linear_alpha", "ConstraintError", "ModelError", "SafeblendError",
    "ScenarioError", "SimulationDiverged", "TrajectoryError", "JointState",
    "MechanicalModel", "PointMassModel", "TwoLinkArmModel",
    "DisturbanceProfile", "Scenario", "Trajectory", "rk4_step", "simulate",
    "CheckReport", "check_asymptotic_return", "check_forward_invariance",
    "check_nominal_passthrough", "check_passivity", "check_structural",
    "check_velocity_bound", "report_table",
]
