"""Scenario files: scripted agents with waypoint paths and hand events,
condition presets, and per-module config overrides.

Scripted agents replace the depth-camera perception stage: each tick is
synthesized into SkeletonObservations with finite-difference velocities,
so the rest of the engine sees exactly what a tracker would feed it.
All validation happens at load time; tick ingestion never raises.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .attention import AttentionWeights
from .drift import DriftConfig
from .motion import MotionConfig
from .scene import RobotModel, SkeletonObservation, Vec3

HAND_LATERAL_OFFSET = 0.22  # m, left +y / right -y of the torso
HAND_DOWN_DROP = 0.45  # m below the torso point (hip height)
HAND_RAISE_CLEARANCE = 0.1  # m above the shoulder line
DEFAULT_SHOULDER_OFFSET = 0.25  # m above the torso point


class ScenarioError(ValueError):
    """Scenario fails validation; the message names field and location."""


@dataclass(frozen=True)
class Waypoint:
    t: float
    pos: Vec3


@dataclass(frozen=True)
class HandEvent:
    t: float
    hand: str  # "left" | "right"
    state: str  # "raise" | "lower"


@dataclass(frozen=True)
class AgentScript:
    agent_id: int
    waypoints: tuple[Waypoint, ...]
    hand_events: tuple[HandEvent, ...] = ()
    shoulder_offset: float = DEFAULT_SHOULDER_OFFSET
    active_from: float | None = None  # default: whole scenario
    active_to: float | None = None


@dataclass(frozen=True)
class Condition:
    arousal: float = 5.0
    attention: str = "high"  # "low" | "high"


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    dt: float = 1.0 / 30.0
    duration_s: float = 10.0
    condition: Condition = Condition()
    agents: tuple[AgentScript, ...] = ()
    weights: AttentionWeights = AttentionWeights()
    drift: DriftConfig = DriftConfig()
    motion: MotionConfig = MotionConfig()
    idle_period_s: float = 4.0
    recorded_stream: str | None = None

    @property
    def tick_count(self) -> int:
        return int(round(self.duration_s / self.dt))


# ---------- parsing ----------


def _require(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise ScenarioError(f"{where}: {message}")


def _parse_agent(raw: dict, where: str) -> AgentScript:
    _require("id" in raw, where, "missing required field 'id'")
    _require(isinstance(raw["id"], int), f"{where}.id", "agent id must be an integer")
    wps_raw = raw.get("waypoints", [])
    _require(bool(wps_raw), f"{where}.waypoints", "at least one waypoint is required")
    waypoints = []
    for i, wp in enumerate(wps_raw):
        loc = f"{where}.waypoints[{i}]"
        _require("t" in wp and "pos" in wp, loc, "waypoint needs 't' and 'pos'")
        pos = wp["pos"]
        _require(len(pos) == 3, f"{loc}.pos", "position must be a 3-vector")
        _require(
            all(math.isfinite(float(v)) for v in pos), f"{loc}.pos", "position must be finite"
        )
        waypoints.append(Waypoint(t=float(wp["t"]), pos=tuple(float(v) for v in pos)))
    for i in range(1, len(waypoints)):
        _require(
            waypoints[i].t > waypoints[i - 1].t,
            f"{where}.waypoints[{i}].t",
            "waypoint times must be strictly increasing",
        )
    events = []
    for i, ev in enumerate(raw.get("hand_events", [])):
        loc = f"{where}.hand_events[{i}]"
        _require(ev.get("hand") in ("left", "right"), f"{loc}.hand", "must be 'left' or 'right'")
        _require(ev.get("state") in ("raise", "lower"), f"{loc}.state", "must be 'raise' or 'lower'")
        events.append(HandEvent(t=float(ev["t"]), hand=ev["hand"], state=ev["state"]))
    for i in range(1, len(events)):
        _require(
            events[i].t >= events[i - 1].t,
            f"{where}.hand_events[{i}].t",
            "hand events must be time-sorted",
        )
    return AgentScript(
        agent_id=raw["id"],
        waypoints=tuple(waypoints),
        hand_events=tuple(events),
        shoulder_offset=float(raw.get("shoulder_offset", DEFAULT_SHOULDER_OFFSET)),
        active_from=float(raw["active_from"]) if "active_from" in raw else None,
        active_to=float(raw["active_to"]) if "active_to" in raw else None,
    )


def _config_from(raw: dict, cls, where: str, key_map: dict[str, str] | None = None):
    kwargs = {}
    fields = {f for f in cls.__dataclass_fields__}
    for key, value in raw.items():
        attr = (key_map or {}).get(key, key)
        _require(attr in fields, f"{where}.{key}", "unknown config field")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[attr] = value
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def scenario_from_dict(raw: dict) -> Scenario:
    cond_raw = raw.get("condition", {})
    condition = Condition(
        arousal=float(cond_raw.get("arousal", 5.0)),
        attention=cond_raw.get("attention", "high"),
    )
    _require(
        1.0 <= condition.arousal <= 10.0,
        "condition.arousal",
        f"must be within [1, 10], got {condition.arousal}",
    )
    _require(
        condition.attention in ("low", "high"),
        "condition.attention",
        f"must be 'low' or 'high', got {condition.attention!r}",
    )
    dt = float(raw.get("dt", 1.0 / 30.0))
    _require(dt > 0, "dt", f"must be > 0, got {dt}")
    duration = float(raw.get("duration_s", 10.0))
    _require(duration > 0, "duration_s", f"must be > 0, got {duration}")

    agents = tuple(
        _parse_agent(a, f"agents[{i}]") for i, a in enumerate(raw.get("agents", []))
    )
    seen: dict[int, int] = {}
    for i, agent in enumerate(agents):
        if agent.agent_id in seen:
            raise ScenarioError(
                f"agents[{i}].id: duplicate agent id {agent.agent_id} "
                f"(first used at agents[{seen[agent.agent_id]}])"
            )
        seen[agent.agent_id] = i

    weights = _config_from(
        raw.get("weights", {}), AttentionWeights, "weights", {"lambda": "lam"}
    )
    drift = _config_from(raw.get("drift", {}), DriftConfig, "drift")
    motion = _config_from(raw.get("motion", {}), MotionConfig, "motion")
    try:
        drift.validate_for_dt(dt)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    return Scenario(
        seed=int(raw.get("seed", 0)),
        dt=dt,
        duration_s=duration,
        condition=condition,
        agents=agents,
        weights=weights,
        drift=drift,
        motion=motion,
        idle_period_s=float(raw.get("idle_period_s", 4.0)),
        recorded_stream=raw.get("recorded_stream"),
    )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(raw)


def validate_against_model(scenario: Scenario, model: RobotModel) -> None:
    """Check scripted positions against the configured workspace box."""
    (lo, hi) = model.workspace_bounds
    for i, agent in enumerate(scenario.agents):
        for j, wp in enumerate(agent.waypoints):
            inside = all(lo[k] <= wp.pos[k] <= hi[k] for k in range(3))
            _require(
                inside,
                f"agents[{i}].waypoints[{j}].pos",
                f"outside the workspace bounding box {lo}..{hi}",
            )


# ---------- tick ingestion ----------


def _path_pos(waypoints: tuple[Waypoint, ...], t: float) -> Vec3:
    if t <= waypoints[0].t:
        return waypoints[0].pos
    if t >= waypoints[-1].t:
        return waypoints[-1].pos
    for i in range(1, len(waypoints)):
        if t <= waypoints[i].t:
            a, b = waypoints[i - 1], waypoints[i]
            u = (t - a.t) / (b.t - a.t)
            return tuple(pa + (pb - pa) * u for pa, pb in zip(a.pos, b.pos))
    return waypoints[-1].pos


def _hand_state(agent: AgentScript, t: float) -> tuple[bool, bool]:
    left = right = False
    for ev in agent.hand_events:
        if ev.t > t:
            break
        raised = ev.state == "raise"
        if ev.hand == "left":
            left = raised
        else:
            right = raised
    return left, right


def _agent_active(agent: AgentScript, t: float, duration: float) -> bool:
    start = agent.active_from if agent.active_from is not None else 0.0
    end = agent.active_to if agent.active_to is not None else duration
    return start <= t <= end


def _agent_snapshot(agent: AgentScript, t: float) -> tuple[Vec3, Vec3, Vec3, float]:
    """(torso, left hand, right hand, shoulder height) at time t."""
    torso = _path_pos(agent.waypoints, t)
    shoulder = torso[2] + agent.shoulder_offset
    left_up, right_up = _hand_state(agent, t)
    left = (
        torso[0],
        torso[1] + HAND_LATERAL_OFFSET,
        shoulder + HAND_RAISE_CLEARANCE if left_up else torso[2] - HAND_DOWN_DROP,
    )
    right = (
        torso[0],
        torso[1] - HAND_LATERAL_OFFSET,
        shoulder + HAND_RAISE_CLEARANCE if right_up else torso[2] - HAND_DOWN_DROP,
    )
    return torso, left, right, shoulder


def ingest_scenario_tick(scenario: Scenario, tick: int) -> list[SkeletonObservation]:
    """Observations for every scripted agent active at this tick.

    Velocities are backward finite differences over dt; the first active
    tick of an agent reports zero velocity (no history yet).
    """
    if tick < 0 or tick > scenario.tick_count:
        raise ValueError(f"tick {tick} outside scenario duration")
    dt = scenario.dt
    t = tick * dt
    out: list[SkeletonObservation] = []
    for agent in scenario.agents:
        if not _agent_active(agent, t, scenario.duration_s):
            continue
        torso, left, right, shoulder = _agent_snapshot(agent, t)
        t_prev = t - dt
        if tick > 0 and _agent_active(agent, t_prev, scenario.duration_s):
            torso_p, left_p, right_p, _ = _agent_snapshot(agent, t_prev)
            torso_vel = tuple((a - b) / dt for a, b in zip(torso, torso_p))
            left_vel = tuple((a - b) / dt for a, b in zip(left, left_p))
            right_vel = tuple((a - b) / dt for a, b in zip(right, right_p))
        else:
            torso_vel = left_vel = right_vel = (0.0, 0.0, 0.0)
        out.append(
            SkeletonObservation(
                person_id=agent.agent_id,
                t=t,
                torso_pos=torso,
                torso_vel=torso_vel,
                left_hand_pos=left,
                right_hand_pos=right,
                left_hand_vel=left_vel,
                right_hand_vel=right_vel,
                shoulder_height=shoulder,
            )
        )
    return out


# ---------- recorded streams ----------


def read_skeleton_stream(path: str, debounce_ticks: int = 3) -> list[list[SkeletonObservation]]:
    """Read a JSON-lines skeleton recording into per-tick batches.

    Lines sharing a timestamp form one batch. Raised-hand flags are
    debounced: the raw above-shoulder indicator must hold for
    `debounce_ticks` consecutive batches before the reported flag flips.
    """
    raw_by_t: dict[float, list[dict]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            raw_by_t.setdefault(float(rec["t"]), []).append(rec)

    streaks: dict[tuple[int, str], tuple[bool, int]] = {}
    settled: dict[tuple[int, str], bool] = {}

    def _debounced(pid: int, hand: str, raw_flag: bool) -> bool:
        key = (pid, hand)
        flag, run = streaks.get(key, (raw_flag, 0))
        run = run + 1 if raw_flag == flag else 1
        streaks[key] = (raw_flag, run)
        if run >= debounce_ticks:
            settled[key] = raw_flag
        return settled.get(key, False)

    batches: list[list[SkeletonObservation]] = []
    for t in sorted(raw_by_t):
        batch = []
        for rec in raw_by_t[t]:
            pid = int(rec["person_id"])
            shoulder = float(rec["shoulder_height"])
            left = tuple(float(v) for v in rec["left_hand_pos"])
            right = tuple(float(v) for v in rec["right_hand_pos"])
            batch.append(
                SkeletonObservation(
                    person_id=pid,
                    t=t,
                    torso_pos=tuple(float(v) for v in rec["torso_pos"]),
                    torso_vel=tuple(float(v) for v in rec.get("torso_vel", (0, 0, 0))),
                    left_hand_pos=left,
                    right_hand_pos=right,
                    left_hand_vel=tuple(float(v) for v in rec.get("left_hand_vel", (0, 0, 0))),
                    right_hand_vel=tuple(float(v) for v in rec.get("right_hand_vel", (0, 0, 0))),
                    shoulder_height=shoulder,
                    left_hand_raised=_debounced(pid, "left", left[2] > shoulder),
                    right_hand_raised=_debounced(pid, "right", right[2] > shoulder),
                )
            )
        batches.append(batch)
    return batches
