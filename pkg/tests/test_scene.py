from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dh_oracle import oracle_fk
from socialarm.scene import (
    RobotModel,
    forward_kinematics,
    gaze_direction,
    load_robot_config,
    pose_matrix,
    vec_norm,
    vec_sub,
)
from socialarm.scenario import Scenario, ingest_scenario_tick, scenario_from_dict

ZERO6 = (0.0,) * 6


def _random_pose(rng: random.Random, model: RobotModel):
    return tuple(rng.uniform(lo, hi) for lo, hi in model.joint_limits)


def test_zero_pose_matches_oracle(robot):
    got = np.array(forward_kinematics(robot, ZERO6))
    want = oracle_fk(robot, ZERO6)
    assert np.max(np.abs(got - want)) < 1e-12


def test_zero_pose_tcp_position(robot):
    # frozen from the oracle: a2+a3 along x, -(d4+d6) along y, d1-d5 up
    t = forward_kinematics(robot, ZERO6)
    assert t[0][3] == pytest.approx(-0.8172, abs=1e-12)
    assert t[1][3] == pytest.approx(-0.2329, abs=1e-12)
    assert t[2][3] == pytest.approx(0.0628, abs=1e-12)


def test_fk_agrees_with_oracle_on_random_poses(robot):
    rng = random.Random(20240811)
    for _ in range(1000):
        pose = _random_pose(rng, robot)
        got = np.array(forward_kinematics(robot, pose))
        want = oracle_fk(robot, pose)
        assert np.max(np.abs(got - want)) < 1e-9


def test_base_rotation_preserves_cylindrical_radius(robot):
    rng = random.Random(3)
    pose = _random_pose(rng, robot)
    rotated = (pose[0] + math.pi,) + pose[1:]
    t0 = forward_kinematics(robot, pose)
    t1 = forward_kinematics(robot, rotated)
    r0 = math.hypot(t0[0][3], t0[1][3])
    r1 = math.hypot(t1[0][3], t1[1][3])
    assert r0 == pytest.approx(r1, abs=1e-9)
    assert t0[2][3] == pytest.approx(t1[2][3], abs=1e-9)


def _degenerate_model():
    return RobotModel(
        dh_parameters=((0.0, 0.0, 0.0, 0.0),) * 6,
        joint_limits=((-math.pi, math.pi),) * 6,
        joint_velocity_limits=(1.0,) * 6,
        base_pose=pose_matrix((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        gaze_axis=(0.0, 0.0, 1.0),
        hunched_preset=ZERO6,
        upright_preset=ZERO6,
        breathing_mask=(0.0,) * 6,
        workspace_bounds=((-5.0, -5.0, -1.0), (5.0, 5.0, 3.0)),
    )


def test_degenerate_chain_stays_at_origin():
    model = _degenerate_model()
    rng = random.Random(11)
    for _ in range(20):
        pose = tuple(rng.uniform(-3.0, 3.0) for _ in range(6))
        t = forward_kinematics(model, pose)
        assert (t[0][3], t[1][3], t[2][3]) == (0.0, 0.0, 0.0)
    # angles summing to zero compose to the identity transform
    pose = (0.7, -0.2, 0.4, -0.7, 0.2, -0.4)
    t = forward_kinematics(model, pose)
    want = np.eye(4)
    assert np.max(np.abs(np.array(t) - want)) < 1e-12


def test_gaze_direction_is_unit(robot):
    rng = random.Random(5)
    for _ in range(50):
        pose = _random_pose(rng, robot)
        _, axis = gaze_direction(robot, pose)
        assert vec_norm(axis) == pytest.approx(1.0, abs=1e-9)


# ---------- scripted ingestion ----------


def _scenario(agents, dt=1.0 / 30.0, duration=10.0) -> Scenario:
    return scenario_from_dict(
        {"dt": dt, "duration_s": duration, "condition": {"arousal": 5, "attention": "high"}, "agents": agents}
    )


def test_static_agent_has_zero_velocity():
    sc = _scenario([{"id": 1, "waypoints": [{"t": 0.0, "pos": [2, 0, 1]}]}])
    obs = ingest_scenario_tick(sc, 5)[0]
    assert obs.torso_vel == (0.0, 0.0, 0.0)


def test_linear_motion_velocity_matches_path_speed():
    sc = _scenario(
        [
            {
                "id": 1,
                "waypoints": [{"t": 0.0, "pos": [0, 0, 1]}, {"t": 10.0, "pos": [10, 0, 1]}],
            }
        ]
    )
    for tick in (1, 7, 60, 150, 299):
        obs = ingest_scenario_tick(sc, tick)[0]
        assert obs.torso_vel[0] == pytest.approx(1.0, abs=1e-9)
        assert obs.torso_vel[1] == pytest.approx(0.0, abs=1e-9)
        assert obs.torso_vel[2] == pytest.approx(0.0, abs=1e-9)


def test_hand_raise_event_lifts_hand_above_shoulder():
    sc = _scenario(
        [
            {
                "id": 1,
                "waypoints": [{"t": 0.0, "pos": [2, 0, 1]}],
                "hand_events": [{"t": 2.0, "hand": "left", "state": "raise"}],
            }
        ]
    )
    before = ingest_scenario_tick(sc, 59)[0]
    at = ingest_scenario_tick(sc, 60)[0]
    assert not before.left_raised
    assert at.left_hand_pos[2] > at.shoulder_height
    assert at.left_raised
    assert not at.right_raised


def test_ingestion_is_pure():
    sc = _scenario(
        [
            {
                "id": 1,
                "waypoints": [{"t": 0.0, "pos": [1, 1, 1]}, {"t": 5.0, "pos": [2, -1, 1]}],
                "hand_events": [{"t": 1.0, "hand": "right", "state": "raise"}],
            }
        ]
    )
    for tick in range(0, 200, 17):
        assert ingest_scenario_tick(sc, tick) == ingest_scenario_tick(sc, tick)


@settings(max_examples=30, deadline=None)
@given(
    x1=st.floats(-3, 3),
    y1=st.floats(-3, 3),
    x2=st.floats(-3, 3),
    y2=st.floats(-3, 3),
    tick=st.integers(1, 299),
)
def test_finite_difference_consistency(x1, y1, x2, y2, tick):
    # ||v|| * dt equals ||delta pos|| along any piecewise-linear path
    sc = _scenario(
        [
            {
                "id": 1,
                "waypoints": [
                    {"t": 0.0, "pos": [x1, y1, 1.0]},
                    {"t": 4.0, "pos": [x2, y2, 1.2]},
                    {"t": 10.0, "pos": [x1, y2, 0.9]},
                ],
            }
        ]
    )
    cur = ingest_scenario_tick(sc, tick)[0]
    prev = ingest_scenario_tick(sc, tick - 1)[0]
    moved = vec_norm(vec_sub(cur.torso_pos, prev.torso_pos))
    assert vec_norm(cur.torso_vel) * sc.dt == pytest.approx(moved, abs=1e-9)
