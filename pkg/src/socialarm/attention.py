"""Per-person attention scoring, habituation dynamics, and target selection.

Each person's attention score is a weighted sum of a position score
(exponential proximity decay plus raised-hand bonuses), a velocity score
(torso and hand speeds normalized by fixed maxima, each ratio clamped to
[0, 1]), and a habituation value in [0, 1] that decays while the person
is attended and recovers while they are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .scene import ConfigError, SkeletonObservation, Vec3, WorldState, vec_norm, vec_sub


@dataclass(frozen=True)
class AttentionWeights:
    w_p: float = 1.0
    w_v: float = 1.0
    w_proximity: float = 1.0
    w_hand: float = 0.5
    lam: float = 0.5  # proximity decay constant, 1/m (JSON key "lambda")
    v_max_torso: float = 2.0
    v_max_right: float = 3.0
    v_max_left: float = 3.0
    m_hab: float = -0.1  # 1/s, negative: decay while attended
    m_rest: float = 0.05  # 1/s, positive: recovery while unattended
    hysteresis_margin: float = 0.05
    eviction_horizon_s: float = 5.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ConfigError(f"weights.lambda: must be > 0, got {self.lam}")
        for name in ("v_max_torso", "v_max_right", "v_max_left"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"weights.{name}: must be > 0")
        if self.m_hab >= 0:
            raise ConfigError(f"weights.m_hab: must be negative, got {self.m_hab}")
        if self.m_rest <= 0:
            raise ConfigError(f"weights.m_rest: must be positive, got {self.m_rest}")
        if self.hysteresis_margin < 0:
            raise ConfigError("weights.hysteresis_margin: must be >= 0")


@dataclass(frozen=True)
class AttentionRecord:
    """Decomposition of one person's score at one tick."""

    person_id: int
    P: float
    V: float
    theta: float
    phi: float
    d: float
    h_left: int
    h_right: int


@dataclass(frozen=True)
class AttentionState:
    thetas: dict[int, float] = field(default_factory=dict)
    absent_for: dict[int, float] = field(default_factory=dict)
    current_target: int | None = None
    last_switch_tick: int = 0


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def position_score(obs: SkeletonObservation, robot_base: Vec3, w: AttentionWeights) -> float:
    d = vec_norm(vec_sub(obs.torso_pos, robot_base))
    hands = (1 if obs.left_raised else 0) + (1 if obs.right_raised else 0)
    return w.w_proximity * math.exp(-w.lam * d) + w.w_hand * hands


def velocity_score(obs: SkeletonObservation, w: AttentionWeights) -> float:
    return (
        _clamp01(vec_norm(obs.torso_vel) / w.v_max_torso)
        + _clamp01(vec_norm(obs.right_hand_vel) / w.v_max_right)
        + _clamp01(vec_norm(obs.left_hand_vel) / w.v_max_left)
    )


def update_habituation(
    state: AttentionState,
    present_ids: set[int],
    dt: float,
    w: AttentionWeights,
) -> AttentionState:
    """Advance every tracked theta by one step of the decay/recovery law.

    gamma = 1 for the currently attended person, 0 otherwise; absent
    persons keep recovering until the eviction horizon drops them.
    New persons enter maximally novel at theta = 1.
    """
    thetas: dict[int, float] = {}
    absent: dict[int, float] = {}
    for pid in present_ids:
        theta = state.thetas.get(pid, 1.0)
        gamma = 1.0 if pid == state.current_target else 0.0
        rate = gamma * w.m_hab + (1.0 - gamma) * w.m_rest
        thetas[pid] = _clamp01(theta + rate * dt)
    for pid, theta in state.thetas.items():
        if pid in present_ids:
            continue
        gone = state.absent_for.get(pid, 0.0) + dt
        if gone >= w.eviction_horizon_s:
            continue
        absent[pid] = gone
        thetas[pid] = _clamp01(theta + w.m_rest * dt)
    return replace(state, thetas=thetas, absent_for=absent)


def select_target(
    records: list[AttentionRecord],
    state: AttentionState,
    w: AttentionWeights,
) -> int | None:
    """Argmax of phi with sticky incumbent: a challenger must beat the
    incumbent by more than the hysteresis margin. Ties break to the
    lowest person id; no persons means no target."""
    if not records:
        return None
    best = max(records, key=lambda r: (r.phi, -r.person_id))
    incumbent = next(
        (r for r in records if r.person_id == state.current_target), None
    )
    if incumbent is None or best.person_id == incumbent.person_id:
        return best.person_id
    if best.phi > incumbent.phi + w.hysteresis_margin:
        return best.person_id
    return incumbent.person_id


def step_attention(
    world: WorldState,
    state: AttentionState,
    w: AttentionWeights,
    dt: float,
    robot_base: Vec3 = (0.0, 0.0, 0.0),
    attention_mode: str = "high",
) -> tuple[AttentionState, list[AttentionRecord]]:
    """One attention tick: score all persons with pre-update thetas,
    select the target, then advance habituation under the new selection.

    In low-attention mode persons are still scored (for introspection)
    but never selected; everyone recovers.
    """
    records: list[AttentionRecord] = []
    for obs in world.persons:
        p = position_score(obs, robot_base, w)
        v = velocity_score(obs, w)
        theta = state.thetas.get(obs.person_id, 1.0)
        records.append(
            AttentionRecord(
                person_id=obs.person_id,
                P=p,
                V=v,
                theta=theta,
                phi=w.w_p * p + w.w_v * v + theta,
                d=vec_norm(vec_sub(obs.torso_pos, robot_base)),
                h_left=1 if obs.left_raised else 0,
                h_right=1 if obs.right_raised else 0,
            )
        )
    if attention_mode == "low":
        selection = None
    else:
        selection = select_target(records, state, w)
    if selection != state.current_target:
        state = replace(state, current_target=selection, last_switch_tick=world.tick)
    present = {obs.person_id for obs in world.persons}
    state = update_habituation(state, present, dt, w)
    return state, records
