"""Cross-engine agreement.

The compiled kernel and the pure mirror are required to agree bit for
bit; they evaluate the same expressions in the same order and the build
flags forbid contraction.  The object path re-derives every quantity
through numpy, so it agrees to rounding, and in the baseline mode the
projection switch amplifies last-bit differences chaotically, which is
why those comparisons stay at one step.
"""

import numpy as np
import pytest

import safeblend as sb
from safeblend._engine import COMPILED_AVAILABLE, get_engine

COLUMNS = ("t", "q", "v", "x", "c", "h", "phi", "u", "u_nom", "mu",
           "S", "hdot", "in_C", "in_C_eps", "infeasible")

needs_compiled = pytest.mark.skipif(not COMPILED_AVAILABLE,
                                    reason="compiled kernel not built")


def make_cases(make_scenario, arm, point, task_spec, joint_spec, cfg):
    tracker = sb.InverseDynamicsTracker(
        sb.SinusoidReference(center=[0.8359, -2.216], amplitude=[0.9, 0.7],
                             omega=[0.9, 0.63], phase=[0.0, 1.0]),
        kp=100.0, kd=20.0)
    wins = ((0.03, 0.09, [0.8, -0.6]),)
    cases = []
    for mode in ("safe", "nominal", "baseline"):
        for zoh in (False, True):
            cases.append(make_scenario(arm, task_spec, cfg, tracker,
                                       [0.8359, -1.627], [0.81, 0.2383],
                                       mode=mode, zoh=zoh, windows=wins,
                                       duration=0.15,
                                       name=f"arm-{mode}-zoh{int(zoh)}"))
            cases.append(make_scenario(
                point, joint_spec, cfg, sb.GravityComp(),
                [0.3, 0.2], [0.4, -0.3], mode=mode, zoh=zoh,
                windows=wins, duration=0.15,
                name=f"point-{mode}-zoh{int(zoh)}"))
    return cases


@needs_compiled
def test_compiled_and_pure_agree_bitwise(make_scenario, arm, point,
                                         task_spec, joint_spec, cfg):
    for scn in make_cases(make_scenario, arm, point, task_spec, joint_spec,
                          cfg):
        a = sb.simulate(scn, engine="compiled")
        b = sb.simulate(scn, engine="pure")
        assert a.meta["engine"] == "compiled"
        assert b.meta["engine"] == "pure"
        for name in COLUMNS:
            assert np.array_equal(getattr(a, name), getattr(b, name)), \
                f"{scn.name}: column {name}"


def test_object_path_agrees_safe_and_nominal(make_scenario, arm, point,
                                             task_spec, joint_spec, cfg):
    for scn in make_cases(make_scenario, arm, point, task_spec, joint_spec,
                          cfg):
        if scn.mode == "baseline":
            continue
        a = sb.simulate(scn, engine="pure")
        b = sb.simulate(scn, engine="object")
        assert b.meta["engine"] == "object"
        for name in ("q", "v", "h", "u"):
            assert np.allclose(getattr(a, name), getattr(b, name),
                               atol=1e-9), f"{scn.name}: column {name}"


def test_object_path_agrees_baseline_one_step(make_scenario, arm, point,
                                              task_spec, joint_spec, cfg):
    for scn in make_cases(make_scenario, arm, point, task_spec, joint_spec,
                          cfg):
        if scn.mode != "baseline":
            continue
        short = sb.Scenario(**{**{f.name: getattr(scn, f.name)
                                  for f in scn.__dataclass_fields__.values()},
                               "duration": 2 * scn.dt})
        a = sb.simulate(short, engine="pure")
        b = sb.simulate(short, engine="object")
        for name in ("q", "v", "h", "u", "infeasible"):
            assert np.allclose(getattr(a, name), getattr(b, name),
                               atol=1e-9), f"{scn.name}: column {name}"


@needs_compiled
def test_env_override_forces_pure(make_scenario, point, joint_spec, cfg,
                                  monkeypatch):
    scn = make_scenario(point, joint_spec, cfg, sb.GravityComp(),
                        [0.3, 0.2], [0.4, -0.3], duration=0.05)
    monkeypatch.setenv("SAFEBLEND_PURE", "1")
    assert sb.simulate(scn).meta["engine"] == "pure"
    monkeypatch.delenv("SAFEBLEND_PURE")
    assert sb.simulate(scn).meta["engine"] == "compiled"


def test_get_engine_names():
    run, name = get_engine("pure")
    assert name == "pure" and callable(run)
    if COMPILED_AVAILABLE:
        run, name = get_engine("compiled")
        assert name == "compiled" and callable(run)
        assert get_engine("auto")[1] in ("compiled", "pure")
    with pytest.raises(ValueError):
        get_engine("vectorized")


def test_engine_metadata_survives_auto(make_scenario, point, joint_spec,
                                       cfg):
    scn = make_scenario(point, joint_spec, cfg, sb.GravityComp(),
                        [0.3, 0.2], [0.4, -0.3], duration=0.05)
    tr = sb.simulate(scn)
    expect = "compiled" if COMPILED_AVAILABLE else "pure"
    assert tr.meta["engine"] == expect
