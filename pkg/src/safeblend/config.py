"""Scenario files: JSON with a strict schema (unknown keys rejected).

A scenario file mirrors the Scenario dataclass plus three harness
blocks: calibration (sampling box for the gain bound), tolerances (for
the trajectory checks), and an optional default CSV output path.
SI units throughout; angles in radians.
"""

from __future__ import annotations

import dataclasses
import json

import jsonschema

from .barrier import BarrierConfig
from .constraints import EllipsoidSpec
from .controllers import (ConstantTorque, GravityComp, InverseDynamicsTracker,
                          SetpointReference, SinusoidReference)
from .errors import ScenarioError
from .models import JointState, PointMassModel, TwoLinkArmModel
from .simulate import DisturbanceProfile, Scenario

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_NUM_OR_VEC = {"oneOf": [_NUM, _VEC]}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "model", "constraint", "barrier", "nominal",
                 "initial", "duration"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "model": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"const": "point_mass"},
                        "mass": _NUM_OR_VEC,
                        "n": {"type": "integer", "minimum": 1},
                        "damping": _NUM_OR_VEC,
                        "gravity": _VEC,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"const": "two_link"},
                        "m1": _NUM, "m2": _NUM,
                        "l1": _NUM, "l2": _NUM,
                        "lc1": _NUM, "lc2": _NUM,
                        "I1": _NUM, "I2": _NUM,
                        "g0": _NUM,
                        "damping": _NUM_OR_VEC,
                    },
                },
            ]
        },
        "constraint": {
            "type": "object",
            "additionalProperties": False,
            "required": ["center", "P"],
            "properties": {
                "space": {"enum": ["task", "joint"]},
                "center": _VEC,
                "P": _MAT,
            },
        },
        "barrier": {
            "type": "object",
            "additionalProperties": False,
            "required": ["k_h"],
            "properties": {
                "k_h": _NUM,
                "eps": _NUM,
                "kappa": {"enum": ["cubic", "linear"]},
                "v_bar": _NUM,
            },
        },
        "nominal": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {"kind": {"const": "gravity_comp"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "tau"],
                    "properties": {
                        "kind": {"const": "constant"},
                        "tau": _VEC,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "reference"],
                    "properties": {
                        "kind": {"const": "inverse_dynamics"},
                        "kp": _NUM_OR_VEC,
                        "kd": _NUM_OR_VEC,
                        "reference": {
                            "oneOf": [
                                {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["kind", "q_d"],
                                    "properties": {
                                        "kind": {"const": "setpoint"},
                                        "q_d": _VEC,
                                    },
                                },
                                {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["kind", "center",
                                                 "amplitude", "omega"],
                                    "properties": {
                                        "kind": {"const": "sinusoid"},
                                        "center": _VEC,
                                        "amplitude": _VEC,
                                        "omega": _VEC,
                                        "phase": _VEC,
                                    },
                                },
                            ]
                        },
                    },
                },
            ]
        },
        "mode": {"enum": ["safe", "nominal", "baseline"]},
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["q", "v"],
            "properties": {"q": _VEC, "v": _VEC},
        },
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "zoh": {"type": "boolean"},
        "alpha_gain": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "disturbance": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["t_start", "t_end", "mu"],
                "properties": {
                    "t_start": _NUM,
                    "t_end": _NUM,
                    "mu": _VEC,
                },
            },
        },
        "calibration": {
            "type": "object",
            "additionalProperties": False,
            "required": ["box_lo", "box_hi"],
            "properties": {
                "box_lo": _VEC,
                "box_hi": _VEC,
                "n_samples": {"type": "integer", "minimum": 1},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "invariance": _NUM,
                "velocity": _NUM,
                "passivity": _NUM,
                "return_window": _NUM,
                "return_tol": _NUM,
            },
        },
        "output": {"type": "string", "minLength": 1},
    },
}


@dataclasses.dataclass(frozen=True)
class LoadedScenario:
    """A parsed scenario file: the Scenario plus its harness blocks."""

    scenario: Scenario
    tolerances: dict
    calibration: dict | None
    output: str | None
    raw: dict


def _build_model(obj: dict):
    if obj["kind"] == "point_mass":
        return PointMassModel(mass=obj.get("mass", 1.0), n=obj.get("n"),
                              damping=obj.get("damping", 0.1),
                              gravity=obj.get("gravity"))
    return TwoLinkArmModel(
        m1=obj.get("m1", 1.0), m2=obj.get("m2", 1.0),
        l1=obj.get("l1", 0.5), l2=obj.get("l2", 0.5),
        lc1=obj.get("lc1", 0.25), lc2=obj.get("lc2", 0.25),
        I1=obj.get("I1"), I2=obj.get("I2"),
        g0=obj.get("g0", 9.81), damping=obj.get("damping", 0.1))


def _build_nominal(obj: dict):
    kind = obj["kind"]
    if kind == "gravity_comp":
        return GravityComp()
    if kind == "constant":
        return ConstantTorque(obj["tau"])
    ref_obj = obj["reference"]
    if ref_obj["kind"] == "setpoint":
        ref = SetpointReference(ref_obj["q_d"])
    else:
        center = ref_obj["center"]
        phase = ref_obj.get("phase", [0.0] * len(center))
        ref = SinusoidReference(center=center,
                                amplitude=ref_obj["amplitude"],
                                omega=ref_obj["omega"], phase=phase)
    return InverseDynamicsTracker(reference=ref, kp=obj.get("kp", 100.0),
                                  kd=obj.get("kd", 20.0))


def default_tolerances(zoh: bool) -> dict:
    """Check tolerances used when the scenario file does not set them.

    The invariance allowance is looser under zero-order-hold control,
    where sampling alone produces small barrier undershoots.
    """
    return {
        "invariance": 5e-3 if zoh else 5e-4,
        "velocity": 1e-9,
        "passivity": 1e-3,
        "return_window": 5.0,
        "return_tol": 1e-3,
    }


def load_scenario(path, overrides: dict | None = None) -> LoadedScenario:
    """Parse, schema-validate, and build a scenario file.

    overrides may remap dt, seed, or zoh (the CLI flags) before the
    Scenario is constructed.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ScenarioError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    try:
        jsonschema.validate(raw, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = exc.json_path if exc.json_path else "$"
        raise ScenarioError(f"{path}: schema error at {where}: "
                            f"{exc.message}") from exc

    merged = dict(raw)
    if overrides:
        for key in ("dt", "seed", "zoh"):
            if overrides.get(key) is not None:
                merged[key] = overrides[key]

    try:
        con = merged["constraint"]
        scenario = Scenario(
            name=merged["name"],
            model=_build_model(merged["model"]),
            spec=EllipsoidSpec(center=con["center"], P=con["P"],
                               space=con.get("space", "task")),
            barrier=BarrierConfig(
                k_h=merged["barrier"]["k_h"],
                eps=merged["barrier"].get("eps", 0.1),
                kappa=merged["barrier"].get("kappa", "cubic"),
                v_bar=merged["barrier"].get("v_bar", 1.0)),
            nominal=_build_nominal(merged["nominal"]),
            initial=JointState(merged["initial"]["q"], merged["initial"]["v"]),
            duration=merged["duration"],
            dt=merged.get("dt", 1e-3),
            disturbance=DisturbanceProfile(tuple(
                (w["t_start"], w["t_end"], w["mu"])
                for w in merged.get("disturbance", []))),
            mode=merged.get("mode", "safe"),
            zoh=bool(merged.get("zoh", False)),
            alpha_gain=merged.get("alpha_gain", 1.0),
            seed=merged.get("seed", 0),
        )
    except (ValueError, ScenarioError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    tolerances = default_tolerances(scenario.zoh)
    tolerances.update(merged.get("tolerances", {}))
    return LoadedScenario(scenario=scenario, tolerances=tolerances,
                          calibration=merged.get("calibration"),
                          output=merged.get("output"), raw=raw)
