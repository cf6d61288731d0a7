"""Fixed-timestep composition of the whole engine, condition presets,
trace recording, and aggregate run metrics.

The Engine class owns one session's per-tick pipeline (attention ->
drift -> glances -> gaze arbitration -> solver -> motion) and is fed
observations from either a scripted scenario (run) or a live session
(the websocket service). Runs are fully deterministic in (scenario,
seed): RNG streams are derived per subsystem, and trace files are
written with fixed-width numeric formatting so replays are
byte-identical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

from . import motion as motion_ops
from .attention import AttentionRecord, AttentionState, step_attention
from .drift import step_drift
from .motion import GazeCommand, arousal_profile, posture_setpoint, solve_gaze_pose
from .rng import stream
from .scene import (
    JointPose,
    RobotModel,
    SkeletonObservation,
    VirtualTarget,
    WorldState,
    forward_kinematics,
    gaze_error_rad,
    load_robot_config,
    vec_norm,
    vec_sub,
)
from .scenario import Condition, Scenario, ingest_scenario_tick, read_skeleton_stream, validate_against_model

CONDITION_PRESETS: dict[str, Condition] = {
    "arousal_low__attention_low": Condition(arousal=1.0, attention="low"),
    "arousal_low__attention_high": Condition(arousal=1.0, attention="high"),
    "arousal_high__attention_low": Condition(arousal=10.0, attention="low"),
    "arousal_high__attention_high": Condition(arousal=10.0, attention="high"),
}


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    time: float
    pose: JointPose
    gaze: GazeCommand
    selection: int | None  # attention engine's current person target
    records: tuple[AttentionRecord, ...]
    drift_targets: tuple[VirtualTarget, ...]
    saturated: bool
    gaze_error_deg: float


@dataclass(frozen=True)
class RunMetrics:
    person_gaze_fraction: float
    switch_count: int
    mean_gaze_error_deg: float
    mean_abs_joint_speed: float
    drift_event_count: int
    duration_s: float
    peak_breath_rad: float


class Engine:
    """One deterministic behaviour session over a fixed timestep."""

    def __init__(
        self,
        scenario: Scenario,
        model: RobotModel | None = None,
    ) -> None:
        self.scenario = scenario
        self.model = model if model is not None else load_robot_config()
        self.dt = scenario.dt
        self.weights = scenario.weights
        self.drift_cfg = scenario.drift
        self.motion_cfg = scenario.motion
        self.arousal = scenario.condition.arousal
        self.attention_mode = scenario.condition.attention
        self.profile = arousal_profile(self.arousal, self.motion_cfg)

        self.tick = 0
        self.attention = AttentionState()
        self.drift_targets: list[VirtualTarget] = []
        self.glances: list[GazeCommand] = []
        self._glance_cooldowns: dict[int, float] = {}
        self._prev_obs: list[SkeletonObservation] = []
        self._drift_rng = stream(scenario.seed, "drift")
        self._idle_rng = stream(scenario.seed, "idle")
        self._target_ids = itertools.count(1)
        self._idle_target = self._spawn_idle(0.0)
        self.core_pose: JointPose = posture_setpoint(self.model, self.profile)
        self._setpoint: JointPose = self.core_pose
        self._saturated = False
        self.drift_event_count = 0

    def set_arousal(self, level: float) -> None:
        self.profile = arousal_profile(level, self.motion_cfg)
        self.arousal = level

    def set_attention(self, mode: str) -> None:
        if mode not in ("low", "high"):
            raise ValueError(f"attention mode must be 'low' or 'high', got {mode!r}")
        self.attention_mode = mode

    def _spawn_idle(self, now: float) -> VirtualTarget:
        r = self._idle_rng.uniform(*self.drift_cfg.spawn_radius)
        az = self._idle_rng.uniform(0.0, 2.0 * math.pi)
        z = self._idle_rng.uniform(*self.drift_cfg.spawn_z)
        base = self.model.base_position
        return VirtualTarget(
            target_id=next(self._target_ids),
            pos=(base[0] + r * math.cos(az), base[1] + r * math.sin(az), base[2] + z),
            born_at=now,
            lifespan=self.scenario.idle_period_s,
            kind="idle",
        )

    def step(self, observations: list[SkeletonObservation]) -> TraceRecord:
        t = self.tick * self.dt
        world = WorldState(
            tick=self.tick,
            time=t,
            persons=tuple(observations),
            virtual_targets=tuple(self.drift_targets) + (self._idle_target,),
            robot_pose=self.core_pose,
        )
        self.attention, records = step_attention(
            world,
            self.attention,
            self.weights,
            self.dt,
            robot_base=self.model.base_position,
            attention_mode=self.attention_mode,
        )

        before = {vt.target_id for vt in self.drift_targets}
        self.drift_targets = step_drift(
            self.drift_targets,
            self.arousal,
            self.drift_cfg,
            self._drift_rng,
            t,
            self.dt,
            base_pos=self.model.base_position,
            ids=self._target_ids,
        )
        self.drift_event_count += sum(
            1 for vt in self.drift_targets if vt.target_id not in before
        )

        if self.attention_mode != "low":
            self.glances.extend(
                motion_ops.schedule_glance(
                    self._prev_obs,
                    observations,
                    self.attention.current_target,
                    t,
                    self.motion_cfg,
                    self._glance_cooldowns,
                )
            )
        self.glances = [
            g for g in self.glances if g.expires_at is not None and t < g.expires_at
        ]

        if self._idle_target.expired(t):
            self._idle_target = self._spawn_idle(t)

        selected = next(
            (o for o in observations if o.person_id == self.attention.current_target),
            None,
        )
        command = motion_ops.resolve_gaze(
            selected,
            self.glances,
            self.drift_targets,
            self._idle_target,
            self.attention_mode,
            t,
        )

        ee = forward_kinematics(self.model, self.core_pose)
        ee_pos = (ee[0][3], ee[1][3], ee[2][3])
        if vec_norm(vec_sub(command.target_pos, ee_pos)) > self.motion_cfg.gaze_exclusion_m:
            # warm-start from the previous setpoint, not the lagging core:
            # the goal pose then evolves continuously as the target moves
            solution = solve_gaze_pose(
                self.model, self._setpoint, command.target_pos, self.profile, self.motion_cfg
            )
            self._setpoint = solution.pose
            self._saturated = solution.saturated

        self.core_pose = motion_ops.rate_limit_toward(
            self.core_pose, self._setpoint, self.profile, self.model, self.dt
        )
        emitted = motion_ops.apply_breathing(self.core_pose, self.profile, self.model, t)

        record = TraceRecord(
            tick=self.tick,
            time=t,
            pose=emitted,
            gaze=command,
            selection=self.attention.current_target,
            records=tuple(records),
            drift_targets=tuple(self.drift_targets),
            saturated=self._saturated,
            gaze_error_deg=math.degrees(
                gaze_error_rad(self.model, emitted, command.target_pos)
            ),
        )
        self._prev_obs = observations
        self.tick += 1
        return record


def _metrics_from_trace(
    records: list[TraceRecord], dt: float, drift_event_count: int
) -> RunMetrics:
    n = len(records)
    if n == 0:
        return RunMetrics(0.0, 0, 0.0, 0.0, drift_event_count, 0.0, 0.0)
    person_ticks = sum(1 for r in records if r.gaze.priority == "primary")
    switches = 0
    prev_target: int | None = None
    prev_pose: JointPose | None = None
    speed_sum = 0.0
    speed_n = 0
    breath_peak = 0.0
    for r in records:
        if r.tick > 0 and r.selection != prev_target:
            switches += 1
        prev_target = r.selection
        if prev_pose is not None:
            speed_sum += sum(abs(a - b) for a, b in zip(r.pose, prev_pose)) / len(r.pose) / dt
            speed_n += 1
        prev_pose = r.pose
    err_sum = sum(r.gaze_error_deg for r in records)
    return RunMetrics(
        person_gaze_fraction=person_ticks / n,
        switch_count=switches,
        mean_gaze_error_deg=err_sum / n,
        mean_abs_joint_speed=speed_sum / speed_n if speed_n else 0.0,
        drift_event_count=drift_event_count,
        duration_s=n * dt,
        peak_breath_rad=breath_peak,
    )


def run(
    scenario: Scenario, model: RobotModel | None = None
) -> tuple[list[TraceRecord], RunMetrics]:
    """Execute a scripted scenario tick by tick; deterministic in (scenario, seed)."""
    model = model if model is not None else load_robot_config()
    validate_against_model(scenario, model)
    engine = Engine(scenario, model)

    recorded = (
        read_skeleton_stream(scenario.recorded_stream)
        if scenario.recorded_stream
        else None
    )
    n_ticks = len(recorded) if recorded is not None else scenario.tick_count

    records: list[TraceRecord] = []
    breath_peak = 0.0
    for tick in range(n_ticks):
        if recorded is not None:
            obs = recorded[tick]
        else:
            obs = ingest_scenario_tick(scenario, tick)
        rec = engine.step(obs)
        breath = motion_ops.breathing_offset(engine.profile, model, rec.time)
        breath_peak = max(breath_peak, max(abs(b) for b in breath))
        records.append(rec)
    metrics = _metrics_from_trace(records, scenario.dt, engine.drift_event_count)
    return records, replace(metrics, peak_breath_rad=breath_peak)


def iter_condition_runs(scenario: Scenario, model: RobotModel | None = None):
    """Yield (preset name, condition, trace, metrics) for the 2x2 presets,
    all from the same seed."""
    for name, condition in CONDITION_PRESETS.items():
        variant = replace(scenario, condition=condition)
        records, metrics = run(variant, model)
        yield name, condition, records, metrics


def run_condition_suite(
    scenario: Scenario, model: RobotModel | None = None
) -> dict[str, RunMetrics]:
    return {
        name: metrics for name, _, _, metrics in iter_condition_runs(scenario, model)
    }


# ---------- trace and metrics writers ----------


def _f(x: float) -> str:
    """Fixed-width float formatting: replay files must be byte-identical."""
    return f"{x:.9f}"


def _vec(v) -> str:
    return "[" + ",".join(_f(x) for x in v) + "]"


def trace_line(r: TraceRecord) -> str:
    target_id = "null" if r.gaze.target_id is None else str(r.gaze.target_id)
    recs = ",".join(
        "{"
        + f'"id":{a.person_id},"P":{_f(a.P)},"V":{_f(a.V)},"theta":{_f(a.theta)},'
        + f'"phi":{_f(a.phi)},"d":{_f(a.d)},"h_left":{a.h_left},"h_right":{a.h_right}'
        + "}"
        for a in r.records
    )
    drifts = ",".join(
        "{"
        + f'"id":{vt.target_id},"pos":{_vec(vt.pos)},"born_at":{_f(vt.born_at)},'
        + f'"lifespan":{_f(vt.lifespan)}'
        + "}"
        for vt in r.drift_targets
    )
    selection = "null" if r.selection is None else str(r.selection)
    return (
        "{"
        + f'"tick":{r.tick},"t":{_f(r.time)},"q":{_vec(r.pose)},'
        + f'"gaze":{{"kind":"{r.gaze.priority}","id":{target_id},"pos":{_vec(r.gaze.target_pos)}}},'
        + f'"selection":{selection},'
        + f'"gaze_error_deg":{_f(r.gaze_error_deg)},'
        + f'"saturated":{"true" if r.saturated else "false"},'
        + f'"records":[{recs}],"drift":[{drifts}]'
        + "}"
    )


def write_trace_jsonl(records: list[TraceRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(trace_line(r) + "\n")


def write_trace_csv(records: list[TraceRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("tick,time,q1,q2,q3,q4,q5,q6,target_kind,target_id,gaze_error_deg\n")
        for r in records:
            tid = "" if r.gaze.target_id is None else str(r.gaze.target_id)
            f.write(
                f"{r.tick},{_f(r.time)},"
                + ",".join(_f(q) for q in r.pose)
                + f",{r.gaze.priority},{tid},{_f(r.gaze_error_deg)}\n"
            )


def metrics_to_json(metrics: RunMetrics) -> str:
    return (
        "{"
        + f'"person_gaze_fraction":{_f(metrics.person_gaze_fraction)},'
        + f'"switch_count":{metrics.switch_count},'
        + f'"mean_gaze_error_deg":{_f(metrics.mean_gaze_error_deg)},'
        + f'"mean_abs_joint_speed":{_f(metrics.mean_abs_joint_speed)},'
        + f'"drift_event_count":{metrics.drift_event_count},'
        + f'"duration_s":{_f(metrics.duration_s)},'
        + f'"peak_breath_rad":{_f(metrics.peak_breath_rad)}'
        + "}"
    )


def write_metrics_json(metrics: RunMetrics, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(metrics_to_json(metrics) + "\n")
