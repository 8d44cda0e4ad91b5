"""Integrator, scenario plumbing, disturbance timing, and CSV I/O."""

import math

import numpy as np
import pytest

import safeblend as sb
from safeblend.errors import (ScenarioError, SimulationDiverged,
                              TrajectoryError)
from safeblend.simulate import DisturbanceProfile, Scenario, Trajectory


# ---------------------------------------------------------------- profile

def test_disturbance_half_open_windows():
    p = DisturbanceProfile(((0.05, 0.10, [1.0, -2.0]),))
    assert np.array_equal(p.value(0.05, 2), [1.0, -2.0])     # on at t_start
    assert np.array_equal(p.value(0.0999, 2), [1.0, -2.0])
    assert np.array_equal(p.value(0.10, 2), [0.0, 0.0])      # off at t_end
    assert np.array_equal(p.value(0.0, 2), [0.0, 0.0])
    assert p.end_time() == 0.10


def test_disturbance_empty():
    p = DisturbanceProfile.empty()
    assert np.array_equal(p.value(3.0, 2), [0.0, 0.0])
    assert p.end_time() is None
    assert p.describe() == []


def test_disturbance_validation():
    with pytest.raises(ScenarioError):
        DisturbanceProfile(((0.2, 0.2, [1.0, 0.0]),))        # zero length
    with pytest.raises(ScenarioError):
        DisturbanceProfile(((0.5, 0.2, [1.0, 0.0]),))        # reversed
    with pytest.raises(ScenarioError):
        DisturbanceProfile(((0.0, 1.0, [1.0, 0.0]),
                            (0.5, 2.0, [0.0, 1.0])))         # overlap
    with pytest.raises(ScenarioError):
        DisturbanceProfile(((0.0, 1.0, [np.inf, 0.0]),))
    with pytest.raises(ScenarioError):
        DisturbanceProfile(((0.0, 1.0, [[1.0], [0.0]]),))    # not a vector


def test_disturbance_windows_read_only():
    p = DisturbanceProfile(((0.0, 1.0, [1.0, 0.0]),))
    with pytest.raises(ValueError):
        p.windows[0][2][0] = 9.0


# ---------------------------------------------------------------- scenario

def test_scenario_validation(arm, point, task_spec, joint_spec, cfg):
    nom = sb.GravityComp()
    good = dict(name="x", model=arm, spec=task_spec, barrier=cfg,
                nominal=nom, initial=sb.JointState([0.0, 0.0], [0.0, 0.0]),
                duration=1.0, dt=1e-3)
    Scenario(**good)
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "dt": 0.0})
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "duration": 1e-4})
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "mode": "panic"})
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "initial": sb.JointState([0.0], [0.0])})
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "alpha_gain": 0.0})
    with pytest.raises(ScenarioError):
        Scenario(**{**good,
                    "disturbance": DisturbanceProfile(((0.0, 0.5, [1.0]),))})
    # joint-space ellipsoid of the wrong dimension for the model
    bad_spec = sb.EllipsoidSpec(space="joint", center=[0.0], P=[[1.0]])
    with pytest.raises(ScenarioError):
        Scenario(**{**good, "spec": bad_spec})


def test_scenario_digest_tracks_content(arm, task_spec, cfg):
    base = dict(name="x", model=arm, spec=task_spec, barrier=cfg,
                nominal=sb.GravityComp(),
                initial=sb.JointState([0.0, 0.0], [0.0, 0.0]),
                duration=1.0, dt=1e-3)
    a = Scenario(**base)
    b = Scenario(**base)
    c = Scenario(**{**base, "dt": 2e-3})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert len(a.digest()) == 64 and int(a.digest(), 16) >= 0


def test_n_steps_rounding(arm, task_spec, cfg):
    scn = Scenario(name="x", model=arm, spec=task_spec, barrier=cfg,
                   nominal=sb.GravityComp(),
                   initial=sb.JointState([0.0, 0.0], [0.0, 0.0]),
                   duration=0.3, dt=1e-3)
    assert scn.n_steps == 300


# ---------------------------------------------------------------- integrator

def undamped_point():
    return sb.PointMassModel(mass=1.0, n=2, damping=0.0, gravity=[0.0, 0.0])


def test_rk4_exact_on_constant_acceleration(joint_spec, cfg):
    model = undamped_point()
    tau = np.array([1.0, -0.5])
    scn = Scenario(name="const", model=model, spec=joint_spec, barrier=cfg,
                   nominal=sb.ConstantTorque(tau),
                   initial=sb.JointState([0.1, -0.2], [0.3, 0.4]),
                   duration=1.0, dt=0.01, mode="nominal")
    tr = sb.simulate(scn)
    t = tr.t[:, None]
    q_exact = np.array([0.1, -0.2]) + np.array([0.3, 0.4]) * t + 0.5 * tau * t ** 2
    v_exact = np.array([0.3, 0.4]) + tau * t
    assert np.max(np.abs(tr.q - q_exact)) < 1e-12
    assert np.max(np.abs(tr.v - v_exact)) < 1e-12


def test_rk4_fourth_order_convergence(joint_spec, cfg):
    # heavily damped free motion has an exact exponential solution and
    # enough curvature at these step sizes to sit far above round-off
    k = 5.0
    model = sb.PointMassModel(mass=1.0, n=2, damping=k, gravity=[0.0, 0.0])
    v0 = np.array([1.0, -0.7])
    q0 = np.array([0.2, 0.1])

    def run(dt):
        scn = Scenario(name="damp", model=model, spec=joint_spec, barrier=cfg,
                       nominal=sb.ConstantTorque([0.0, 0.0]),
                       initial=sb.JointState(q0, v0),
                       duration=1.0, dt=dt, mode="nominal")
        tr = sb.simulate(scn)
        e = math.exp(-k * tr.t[-1])
        v_exact = v0 * e
        q_exact = q0 + v0 * (1.0 - e) / k
        return max(np.max(np.abs(tr.v[-1] - v_exact)),
                   np.max(np.abs(tr.q[-1] - q_exact)))

    ratio = run(0.05) / run(0.025)
    assert 12.0 <= ratio <= 20.0


def test_determinism_bitwise(make_scenario, arm, task_spec, cfg):
    scn = make_scenario(arm, task_spec, cfg, sb.GravityComp(),
                        [0.5, -1.8], [0.6, -0.4],
                        windows=((0.05, 0.15, [0.5, -0.3]),), duration=0.3)
    a = sb.simulate(scn)
    b = sb.simulate(scn)
    for name in ("t", "q", "v", "x", "c", "h", "phi", "u", "u_nom", "mu",
                 "S", "hdot", "in_C", "in_C_eps", "infeasible"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name


def test_zoh_changes_the_answer(make_scenario, arm, task_spec, cfg):
    nom = sb.InverseDynamicsTracker(
        sb.SetpointReference([0.3, -0.5]), kp=100.0, kd=20.0)
    a = sb.simulate(make_scenario(arm, task_spec, cfg, nom,
                                  [0.5, -1.0], [0.0, 0.0], duration=0.2))
    b = sb.simulate(make_scenario(arm, task_spec, cfg, nom,
                                  [0.5, -1.0], [0.0, 0.0], duration=0.2,
                                  zoh=True))
    assert not np.array_equal(a.q, b.q)
    # both still land close to the same smooth trajectory
    assert np.max(np.abs(a.q - b.q)) < 5e-3


def test_recorded_mu_matches_profile(make_scenario, arm, task_spec, cfg):
    scn = make_scenario(arm, task_spec, cfg, sb.GravityComp(),
                        [0.5, -1.8], [0.0, 0.0],
                        windows=((0.05, 0.10, [1.0, -2.0]),), duration=0.2)
    tr = sb.simulate(scn)
    k_on = int(round(0.05 / scn.dt))
    k_off = int(round(0.10 / scn.dt))
    assert np.array_equal(tr.mu[k_on], [1.0, -2.0])
    assert np.array_equal(tr.mu[k_off - 1], [1.0, -2.0])
    assert np.array_equal(tr.mu[k_off], [0.0, 0.0])
    assert np.array_equal(tr.mu[0], [0.0, 0.0])


def test_divergence_guard(joint_spec, cfg):
    model = undamped_point()
    scn = Scenario(name="blowup", model=model, spec=joint_spec, barrier=cfg,
                   nominal=sb.ConstantTorque([2.0e6, 0.0]),
                   initial=sb.JointState([0.0, 0.0], [0.0, 0.0]),
                   duration=2.0, dt=1e-2, mode="nominal")
    for engine in ("auto", "object"):
        with pytest.raises(SimulationDiverged) as exc:
            sb.simulate(scn, engine=engine)
        err = exc.value
        assert err.step >= 1
        assert err.t == pytest.approx(err.step * scn.dt)
        assert err.bound == 1.0e6
        assert "step" in str(err)


# ---------------------------------------------------------------- trajectory

def test_summary_and_accessors(make_scenario, arm, task_spec, cfg):
    scn = make_scenario(arm, task_spec, cfg, sb.GravityComp(),
                        [0.5, -1.8], [0.6, -0.4], duration=0.2)
    tr = sb.simulate(scn)
    assert len(tr) == scn.n_steps + 1
    assert tr.n == 2 and tr.d == 2
    s5 = tr.state(5)
    assert np.array_equal(s5.q, tr.q[5]) and np.array_equal(s5.v, tr.v[5])
    sm = tr.summary()
    assert sm["records"] == len(tr)
    assert sm["duration"] == pytest.approx(0.2)
    assert sm["min_h"] <= tr.h[0]
    assert 0.0 <= sm["frac_in_C"] <= 1.0
    assert sm["infeasible_count"] == 0
    assert tr.meta["engine"] in ("compiled", "pure", "object")
    assert tr.meta["digest"] == scn.digest()


def test_csv_round_trip_bit_exact(tmp_path, make_scenario, arm, task_spec,
                                  cfg):
    scn = make_scenario(arm, task_spec, cfg, sb.GravityComp(),
                        [0.5, -1.8], [0.6, -0.4],
                        windows=((0.05, 0.15, [0.5, -0.3]),), duration=0.2)
    tr = sb.simulate(scn)
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    tr.to_csv(p1)
    back = Trajectory.from_csv(p1)
    for name in ("t", "q", "v", "x", "c", "h", "phi", "u", "u_nom", "mu",
                 "S", "hdot"):
        assert np.array_equal(getattr(tr, name), getattr(back, name)), name
    assert np.array_equal(tr.in_C, back.in_C)
    assert np.array_equal(tr.in_C_eps, back.in_C_eps)
    back.to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_error_paths(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(TrajectoryError):
        Trajectory.from_csv(empty)

    badhdr = tmp_path / "bad.csv"
    badhdr.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(TrajectoryError):
        Trajectory.from_csv(badhdr)

    header = ("t,q0,q1,v0,v1,x0,x1,c,h,phi,u0,u1,u_nom0,u_nom1,"
              "mu0,mu1,S,hdot,in_C,in_C_eps")
    short = tmp_path / "short.csv"
    short.write_text(header + "\n1,2,3\n")
    with pytest.raises(TrajectoryError) as exc:
        Trajectory.from_csv(short)
    assert "field count" in str(exc.value)

    alpha = tmp_path / "alpha.csv"
    alpha.write_text(header + "\n" + ",".join(["zap"] * 20) + "\n")
    with pytest.raises(TrajectoryError):
        Trajectory.from_csv(alpha)

    only_header = tmp_path / "hdr.csv"
    only_header.write_text(header + "\n")
    with pytest.raises(TrajectoryError) as exc:
        Trajectory.from_csv(only_header)
    assert "no records" in str(exc.value)
