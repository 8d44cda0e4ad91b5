"""Scenario file loading: schema strictness, defaults, overrides."""

import json

import pytest

import safeblend as sb
from safeblend.config import default_tolerances, load_scenario
from safeblend.errors import ScenarioError

from conftest import SCENARIO_DIR

SHIPPED = sorted(p.name for p in SCENARIO_DIR.glob("*.json"))


def minimal(**extra):
    base = {
        "name": "mini",
        "model": {"kind": "point_mass", "n": 2, "damping": 0.1,
                  "gravity": [0.0, 0.0]},
        "constraint": {"space": "joint", "center": [0.0, 0.0],
                       "P": [[1.0, 0.0], [0.0, 1.0]]},
        "barrier": {"k_h": 0.4},
        "nominal": {"kind": "gravity_comp"},
        "initial": {"q": [0.3, 0.2], "v": [0.0, 0.0]},
        "duration": 0.5,
    }
    base.update(extra)
    return base


def write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_every_shipped_scenario_loads_and_runs_a_step():
    assert len(SHIPPED) == 6
    for name in SHIPPED:
        loaded = load_scenario(SCENARIO_DIR / name)
        assert loaded.scenario.name
        assert loaded.output and loaded.output.endswith(".csv")
        assert set(default_tolerances(False)) <= set(loaded.tolerances)
        # one integration step must run cleanly
        short = sb.Scenario(**{
            **{f: getattr(loaded.scenario, f)
               for f in loaded.scenario.__dataclass_fields__},
            "duration": loaded.scenario.dt})
        sb.simulate(short)


def test_minimal_file_gets_defaults(tmp_path):
    loaded = load_scenario(write(tmp_path, minimal()))
    scn = loaded.scenario
    assert scn.dt == 1e-3 and scn.mode == "safe" and not scn.zoh
    assert scn.barrier.eps == 0.1 and scn.barrier.kappa == "cubic"
    assert scn.barrier.v_bar == 1.0
    assert scn.alpha_gain == 1.0 and scn.seed == 0
    assert loaded.calibration is None and loaded.output is None
    assert loaded.tolerances == default_tolerances(False)


def test_unknown_key_rejected_with_path(tmp_path):
    p = write(tmp_path, minimal(tolerance=0.1))  # misspelled block
    with pytest.raises(ScenarioError) as exc:
        load_scenario(p)
    assert str(p) in str(exc.value)
    assert "schema error" in str(exc.value)

    nested = minimal()
    nested["barrier"]["epsilon"] = 0.2  # unknown nested key
    with pytest.raises(ScenarioError):
        load_scenario(write(tmp_path, nested, "n.json"))


def test_missing_required_key(tmp_path):
    bad = minimal()
    del bad["barrier"]
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, bad))
    assert "barrier" in str(exc.value)


def test_not_json_and_not_a_file(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(p)
    assert "not valid JSON" in str(exc.value)
    with pytest.raises(ScenarioError) as exc:
        load_scenario(tmp_path / "absent.json")
    assert "no such file" in str(exc.value)


def test_semantic_error_carries_file_name(tmp_path):
    bad = minimal()
    bad["initial"]["q"] = [0.1]  # wrong length for the model
    p = write(tmp_path, bad)
    with pytest.raises(ScenarioError) as exc:
        load_scenario(p)
    assert str(p) in str(exc.value)


def test_overrides_remap_dt_seed_zoh(tmp_path):
    p = write(tmp_path, minimal())
    loaded = load_scenario(p, overrides={"dt": 5e-3, "zoh": True, "seed": 7})
    assert loaded.scenario.dt == 5e-3
    assert loaded.scenario.zoh is True
    assert loaded.scenario.seed == 7
    # zoh arriving by override also loosens the default invariance tol
    assert loaded.tolerances["invariance"] == default_tolerances(True)["invariance"]
    # None entries leave the file values alone
    same = load_scenario(p, overrides={"dt": None, "zoh": None, "seed": None})
    assert same.scenario.dt == 1e-3 and same.scenario.zoh is False


def test_explicit_tolerances_win(tmp_path):
    obj = minimal(tolerances={"invariance": 0.02})
    loaded = load_scenario(write(tmp_path, obj))
    assert loaded.tolerances["invariance"] == 0.02
    assert loaded.tolerances["passivity"] == 1e-3  # untouched default


def test_two_link_and_tracker_blocks(tmp_path):
    obj = {
        "name": "armfile",
        "model": {"kind": "two_link"},
        "constraint": {"space": "task", "center": [0.43, -0.12],
                       "P": [[1.78, 0.0], [0.0, 4.95]]},
        "barrier": {"k_h": 0.25, "eps": 0.1, "v_bar": 40.0},
        "nominal": {"kind": "inverse_dynamics", "kp": 80.0, "kd": 18.0,
                    "reference": {"kind": "setpoint", "q_d": [0.3, -0.5]}},
        "initial": {"q": [0.8359, -2.216], "v": [0.0, 0.0]},
        "duration": 0.2,
        "disturbance": [
            {"t_start": 0.05, "t_end": 0.1, "mu": [0.5, -0.5]}],
        "mode": "baseline",
        "alpha_gain": 2.0,
    }
    loaded = load_scenario(write(tmp_path, obj))
    scn = loaded.scenario
    assert isinstance(scn.model, sb.TwoLinkArmModel)
    assert isinstance(scn.nominal, sb.InverseDynamicsTracker)
    assert scn.mode == "baseline" and scn.alpha_gain == 2.0
    assert scn.disturbance.windows[0][0] == 0.05
    sb.simulate(scn)  # runs end to end


def test_digest_stable_across_reload():
    p = SCENARIO_DIR / SHIPPED[0]
    assert load_scenario(p).scenario.digest() == \
        load_scenario(p).scenario.digest()
