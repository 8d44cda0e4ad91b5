"""Shared fixtures: the two models, a task-space and a joint-space
constraint, and short scenario builders used across the suite."""

import pathlib

import numpy as np
import pytest

import safeblend as sb

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"

# one line per acceptance criterion, echoed after the test summary so the
# verdicts survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def arm():
    return sb.TwoLinkArmModel()


@pytest.fixture
def point():
    return sb.PointMassModel(mass=1.0, n=2, damping=0.1, gravity=[0.0, 0.0])


@pytest.fixture
def task_spec():
    return sb.EllipsoidSpec([0.43, -0.12], [[1.78, 0.0], [0.0, 4.95]],
                            space="task")


@pytest.fixture
def joint_spec():
    return sb.EllipsoidSpec([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]],
                            space="joint")


@pytest.fixture
def cfg():
    return sb.BarrierConfig(k_h=0.25, eps=0.1, kappa="cubic", v_bar=40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def short_scenario(model, spec, cfg, nominal, q0, v0, *, mode="safe",
                   duration=0.2, dt=1e-3, windows=(), zoh=False,
                   alpha_gain=1.0, name="short"):
    return sb.Scenario(name=name, model=model, spec=spec, barrier=cfg,
                       nominal=nominal, initial=sb.JointState(q0, v0),
                       duration=duration, dt=dt,
                       disturbance=sb.DisturbanceProfile(windows),
                       mode=mode, zoh=zoh, alpha_gain=alpha_gain)


@pytest.fixture
def make_scenario():
    return short_scenario
