from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialarm.attention import (
    AttentionRecord,
    AttentionState,
    AttentionWeights,
    position_score,
    select_target,
    step_attention,
    update_habituation,
    velocity_score,
)
from socialarm.scene import ConfigError, SkeletonObservation, WorldState

BASE = (0.0, 0.0, 0.0)


def obs(
    pid: int,
    torso=(1.0, 0.0, 1.0),
    torso_vel=(0.0, 0.0, 0.0),
    left_up=False,
    right_up=False,
    hand_vel=(0.0, 0.0, 0.0),
    t=0.0,
) -> SkeletonObservation:
    shoulder = torso[2] + 0.25
    def hand(up, side):
        return (torso[0], torso[1] + side * 0.22, shoulder + 0.1 if up else torso[2] - 0.45)
    return SkeletonObservation(
        person_id=pid,
        t=t,
        torso_pos=torso,
        torso_vel=torso_vel,
        left_hand_pos=hand(left_up, 1),
        right_hand_pos=hand(right_up, -1),
        left_hand_vel=hand_vel,
        right_hand_vel=hand_vel,
        shoulder_height=shoulder,
    )


def world(persons, tick=0, dt=1.0 / 30.0) -> WorldState:
    return WorldState(tick=tick, time=tick * dt, persons=tuple(persons), virtual_targets=(), robot_pose=(0.0,) * 6)


# ---------- position score ----------


def test_position_score_at_base_hands_down():
    w = AttentionWeights(w_proximity=1.0, w_hand=0.5)
    assert position_score(obs(1, torso=BASE), BASE, w) == 1.0


def test_position_score_at_base_both_hands_up():
    w = AttentionWeights(w_proximity=1.0, w_hand=0.5)
    assert position_score(obs(1, torso=BASE, left_up=True, right_up=True), BASE, w) == 2.0


def test_position_score_two_meters_one_hand():
    # hand-evaluated with the decay convention: e^(-0.5*2) + 0.5*1
    w = AttentionWeights(w_proximity=1.0, w_hand=0.5, lam=0.5)
    got = position_score(obs(1, torso=(2.0, 0.0, 0.0), left_up=True), BASE, w)
    assert got == pytest.approx(math.exp(-1.0) + 0.5, abs=1e-12)
    assert got == pytest.approx(0.8678794411714423, abs=1e-12)


def test_hand_additivity_is_exact_at_base():
    w = AttentionWeights(w_proximity=1.0, w_hand=0.5)
    down = position_score(obs(1, torso=BASE), BASE, w)
    one = position_score(obs(1, torso=BASE, left_up=True), BASE, w)
    both = position_score(obs(1, torso=BASE, left_up=True, right_up=True), BASE, w)
    assert one - down == 0.5
    assert both - down == 1.0


@settings(max_examples=50, deadline=None)
@given(d=st.floats(0.01, 6.0), w_hand=st.floats(0.0, 2.0))
def test_hand_additivity_property(d, w_hand):
    w = AttentionWeights(w_hand=w_hand)
    down = position_score(obs(1, torso=(d, 0, 1.0)), BASE, w)
    one = position_score(obs(1, torso=(d, 0, 1.0), right_up=True), BASE, w)
    assert one - down == pytest.approx(w_hand, abs=1e-12)


def test_proximity_is_strictly_decreasing_in_distance():
    w = AttentionWeights()
    scores = [
        position_score(obs(1, torso=(d, 0.0, 1.0)), BASE, w) for d in (0.5, 1.0, 2.0, 4.0)
    ]
    assert all(a > b for a, b in zip(scores, scores[1:]))


# ---------- velocity score ----------


def test_velocity_score_zero_for_static():
    assert velocity_score(obs(1), AttentionWeights()) == 0.0


def test_velocity_score_at_maxima_is_three():
    w = AttentionWeights(v_max_torso=2.0, v_max_right=3.0, v_max_left=3.0)
    o = obs(1, torso_vel=(2.0, 0.0, 0.0), hand_vel=(0.0, 3.0, 0.0))
    assert velocity_score(o, w) == pytest.approx(3.0, abs=1e-12)


def test_velocity_score_half_ratio():
    w = AttentionWeights(v_max_torso=2.0)
    assert velocity_score(obs(1, torso_vel=(1.0, 0.0, 0.0)), w) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    vt=st.floats(0, 100),
    vr=st.floats(0, 100),
    vl=st.floats(0, 100),
)
def test_velocity_score_is_clamped(vt, vr, vl):
    w = AttentionWeights()
    o = obs(1, torso_vel=(vt, 0, 0), hand_vel=(0, vr, 0))
    o = SkeletonObservation(
        **{**o.__dict__, "right_hand_vel": (vr, 0, 0), "left_hand_vel": (0, 0, vl)}
    )
    v = velocity_score(o, w)
    assert 0.0 <= v <= 3.0


# ---------- habituation ----------


def test_habituation_decay_example():
    w = AttentionWeights(m_hab=-0.1, m_rest=0.05)
    state = AttentionState(thetas={1: 0.5}, current_target=1)
    out = update_habituation(state, {1}, 0.1, w)
    assert out.thetas[1] == pytest.approx(0.49, abs=1e-12)


def test_habituation_upper_clamp():
    w = AttentionWeights()
    state = AttentionState(thetas={1: 1.0}, current_target=None)
    out = update_habituation(state, {1}, 5.0, w)
    assert out.thetas[1] == 1.0


def test_habituation_lower_clamp():
    w = AttentionWeights()
    state = AttentionState(thetas={1: 0.0}, current_target=1)
    out = update_habituation(state, {1}, 5.0, w)
    assert out.thetas[1] == 0.0


def test_new_person_enters_at_one():
    w = AttentionWeights()
    out = update_habituation(AttentionState(), {7}, 1.0 / 30.0, w)
    assert out.thetas[7] == 1.0  # clamped right back to 1 while unattended


def test_absent_person_evicted_after_horizon():
    w = AttentionWeights(eviction_horizon_s=1.0)
    state = AttentionState(thetas={1: 0.4})
    dt = 0.25
    for _ in range(3):
        state = update_habituation(state, set(), dt, w)
        assert 1 in state.thetas
    state = update_habituation(state, set(), dt, w)
    assert 1 not in state.thetas


@settings(max_examples=40, deadline=None)
@given(
    theta0=st.floats(0.0, 1.0),
    attended=st.booleans(),
    steps=st.integers(1, 200),
    dt=st.floats(0.001, 0.5),
)
def test_habituation_stays_bounded(theta0, attended, steps, dt):
    w = AttentionWeights()
    state = AttentionState(thetas={1: theta0}, current_target=1 if attended else None)
    for _ in range(steps):
        state = update_habituation(state, {1}, dt, w)
        assert 0.0 <= state.thetas[1] <= 1.0


# ---------- selection ----------


def rec(pid, phi) -> AttentionRecord:
    return AttentionRecord(person_id=pid, P=0, V=0, theta=0, phi=phi, d=1, h_left=0, h_right=0)


def test_select_plain_argmax():
    w = AttentionWeights()
    assert select_target([rec(1, 2.0), rec(2, 1.0)], AttentionState(), w) == 1


def test_select_retains_incumbent_within_margin():
    w = AttentionWeights(hysteresis_margin=0.05)
    state = AttentionState(current_target=2)
    assert select_target([rec(1, 1.03), rec(2, 1.0)], state, w) == 2


def test_select_switches_beyond_margin():
    w = AttentionWeights(hysteresis_margin=0.05)
    state = AttentionState(current_target=2)
    assert select_target([rec(1, 1.06), rec(2, 1.0)], state, w) == 1


def test_select_empty_returns_none():
    assert select_target([], AttentionState(), AttentionWeights()) is None


def test_select_tie_breaks_to_lowest_id():
    w = AttentionWeights()
    assert select_target([rec(2, 1.0), rec(1, 1.0)], AttentionState(), w) == 1


# ---------- step composition ----------


def test_single_person_selected_then_theta_decays():
    w = AttentionWeights()
    state = AttentionState()
    dt = 1.0 / 30.0
    thetas = []
    for tick in range(10):
        state, records = step_attention(world([obs(1)], tick=tick), state, w, dt)
        assert state.current_target == 1
        thetas.append(state.thetas[1])
    assert all(a > b for a, b in zip(thetas, thetas[1:]))


def test_mirror_symmetric_pair_tie_breaks_to_lower_id():
    w = AttentionWeights()
    state, _ = step_attention(
        world([obs(2, torso=(1, -1, 1)), obs(1, torso=(1, 1, 1))]),
        AttentionState(),
        w,
        1.0 / 30.0,
    )
    assert state.current_target == 1


def test_low_attention_ignores_persons():
    w = AttentionWeights()
    state, records = step_attention(
        world([obs(1)]), AttentionState(), w, 1.0 / 30.0, attention_mode="low"
    )
    assert state.current_target is None
    assert len(records) == 1  # still scored for introspection


def test_nearer_of_identical_pair_wins_first_contact():
    w = AttentionWeights()
    state, _ = step_attention(
        world([obs(1, torso=(3.0, 0, 1)), obs(2, torso=(1.0, 0, 1))]),
        AttentionState(),
        w,
        1.0 / 30.0,
    )
    assert state.current_target == 2


def test_phi_composition_is_exact():
    w = AttentionWeights(w_p=1.3, w_v=0.7)
    o = obs(1, torso=(1.5, 0.5, 1.0), torso_vel=(0.4, 0, 0), right_up=True)
    _, records = step_attention(world([o]), AttentionState(), w, 1.0 / 30.0)
    r = records[0]
    assert r.phi == w.w_p * r.P + w.w_v * r.V + r.theta


def test_step_attention_is_pure():
    w = AttentionWeights()
    persons = [obs(1), obs(2, torso=(2, 1, 1))]
    a = step_attention(world(persons), AttentionState(), w, 1.0 / 30.0)
    b = step_attention(world(persons), AttentionState(), w, 1.0 / 30.0)
    assert a == b


# ---------- alternation vs closed form ----------


def measured_steady_dwell(w: AttentionWeights, dt: float, duration: float) -> float:
    """Simulate two mirror-symmetric persons and measure the steady-state
    dwell between selection switches, discarding the initial transient."""
    persons = [obs(1, torso=(1.0, 1.0, 1.0)), obs(2, torso=(1.0, -1.0, 1.0))]
    state = AttentionState()
    switch_ticks = []
    prev = None
    for tick in range(int(duration / dt)):
        state, _ = step_attention(world(persons, tick=tick), state, w, dt)
        if state.current_target != prev:
            switch_ticks.append(tick)
            prev = state.current_target
    dwells = [
        (b - a) * dt for a, b in zip(switch_ticks, switch_ticks[1:])
    ]
    steady = dwells[len(dwells) // 2 :]
    return sum(steady) / len(steady)


def closed_form_dwell(w: AttentionWeights) -> float:
    """Straight-line prediction: in steady state one theta rides its clamp,
    so the phi gap reopens at the slower of the two rates."""
    return w.hysteresis_margin / min(abs(w.m_hab), w.m_rest)


@pytest.mark.parametrize(
    "m_hab,m_rest,margin",
    [(-0.1, 0.05, 0.05), (-0.05, 0.1, 0.05), (-0.08, 0.08, 0.04)],
)
def test_alternation_matches_closed_form(m_hab, m_rest, margin):
    w = AttentionWeights(m_hab=m_hab, m_rest=m_rest, hysteresis_margin=margin)
    dt = 1.0 / 30.0
    measured = measured_steady_dwell(w, dt, duration=120.0)
    assert measured == pytest.approx(closed_form_dwell(w), rel=0.10)
