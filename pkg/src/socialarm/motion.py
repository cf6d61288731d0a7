"""Gaze-to-joint-space motion: arousal profiles, glances, the weighted
iterative gaze solver, rate limiting, and breathing oscillation.

The solver points the end-effector gaze axis at a 3D target. Per-joint
quadratic step penalties make the wrist (distal) joints absorb the
motion wherever they can, which keeps the gaze "local"; a null-space
pull draws the rest of the arm toward the arousal-blended posture
preset without disturbing the pointing task.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scene import (
    ConfigError,
    JointPose,
    RobotModel,
    SkeletonObservation,
    Vec3,
    VirtualTarget,
    fk_frames,
    vec_cross,
    vec_dot,
    vec_norm,
    vec_sub,
)


@dataclass(frozen=True)
class MotionConfig:
    speed_scale_range: tuple[float, float] = (0.2, 1.0)
    posture_blend_range: tuple[float, float] = (0.0, 1.0)
    reach_scale_range: tuple[float, float] = (0.6, 1.0)
    breath_amplitude_range: tuple[float, float] = (0.01, 0.035)  # rad
    breath_frequency: float = 0.25  # Hz
    glance_duration: float = 0.7  # s
    glance_cooldown: float = 3.0  # s per person
    proximal_weight_ratio: float = 10.0  # step-amplitude penalty, joints 1-3 vs 4-6
    solver_max_iters: int = 50
    solver_damping: float = 0.05
    solver_step_limit: float = 0.3  # rad per joint per iteration
    solver_tolerance_deg: float = 0.1
    saturation_threshold_deg: float = 2.0
    null_space_gain: float = 0.05  # posture pull per iteration, scaled by reach
    gaze_exclusion_m: float = 0.05


@dataclass(frozen=True)
class ArousalProfile:
    level: float
    speed_scale: float
    posture_blend: float
    reach_scale: float
    breath_amplitude: float
    breath_frequency: float


@dataclass(frozen=True)
class GazeCommand:
    target_pos: Vec3
    priority: str  # "glance" | "drift" | "primary" | "idle"
    expires_at: float | None = None
    target_id: int | None = None


@dataclass(frozen=True)
class GazeSolution:
    pose: JointPose
    error_deg: float
    saturated: bool
    iterations: int


def _lerp(lo: float, hi: float, u: float) -> float:
    return lo + (hi - lo) * u


def arousal_profile(level: float, cfg: MotionConfig = MotionConfig()) -> ArousalProfile:
    """Linear interpolation of all motion parameters across arousal 1..10."""
    if not 1.0 <= level <= 10.0:
        raise ConfigError(f"arousal: must be within [1, 10], got {level}")
    u = (level - 1.0) / 9.0
    return ArousalProfile(
        level=level,
        speed_scale=_lerp(*cfg.speed_scale_range, u),
        posture_blend=_lerp(*cfg.posture_blend_range, u),
        reach_scale=_lerp(*cfg.reach_scale_range, u),
        breath_amplitude=_lerp(*cfg.breath_amplitude_range, u),
        breath_frequency=cfg.breath_frequency,
    )


def posture_setpoint(model: RobotModel, profile: ArousalProfile) -> JointPose:
    """Arousal base posture: blend of the hunched and upright presets."""
    b = profile.posture_blend
    return tuple(
        h + (u - h) * b for h, u in zip(model.hunched_preset, model.upright_preset)
    )


# ---------- gaze command arbitration ----------


def resolve_gaze(
    selected: SkeletonObservation | None,
    glances: list[GazeCommand],
    drift_targets: list[VirtualTarget],
    idle_target: VirtualTarget,
    attention_mode: str,
    now: float,
) -> GazeCommand:
    """Pick this tick's gaze command: glance > drift > primary > idle.

    Low attention drops person-derived targets (primary and glances),
    leaving only drift and idle.
    """
    if attention_mode != "low":
        for glance in glances:
            if glance.expires_at is not None and now < glance.expires_at:
                return glance
    for vt in drift_targets:
        if not vt.expired(now):
            return GazeCommand(
                target_pos=vt.pos,
                priority="drift",
                expires_at=vt.born_at + vt.lifespan,
                target_id=vt.target_id,
            )
    if attention_mode != "low" and selected is not None:
        return GazeCommand(
            target_pos=selected.torso_pos, priority="primary", target_id=selected.person_id
        )
    return GazeCommand(
        target_pos=idle_target.pos, priority="idle", target_id=idle_target.target_id
    )


def schedule_glance(
    prev_obs: list[SkeletonObservation],
    cur_obs: list[SkeletonObservation],
    attended_id: int | None,
    now: float,
    cfg: MotionConfig,
    cooldowns: dict[int, float],
) -> list[GazeCommand]:
    """Emit glances at hands that just went up on non-attended persons.

    A glance fires on a raised-flag rising edge, lasts glance_duration,
    and each person then cools down for glance_cooldown. `cooldowns`
    (person id -> last glance time) is updated in place.
    """
    prev_by_id = {o.person_id: o for o in prev_obs}
    out: list[GazeCommand] = []
    for obs in cur_obs:
        if obs.person_id == attended_id:
            continue
        prev = prev_by_id.get(obs.person_id)
        if prev is None:
            continue
        last = cooldowns.get(obs.person_id)
        if last is not None and now - last < cfg.glance_cooldown:
            continue
        for raised_now, raised_before, hand_pos in (
            (obs.left_raised, prev.left_raised, obs.left_hand_pos),
            (obs.right_raised, prev.right_raised, obs.right_hand_pos),
        ):
            if raised_now and not raised_before:
                out.append(
                    GazeCommand(
                        target_pos=hand_pos,
                        priority="glance",
                        expires_at=now + cfg.glance_duration,
                        target_id=obs.person_id,
                    )
                )
                cooldowns[obs.person_id] = now
                break
    return out


# ---------- gaze solver ----------


def _solve3(a: list[list[float]], b: Vec3) -> Vec3:
    """Cramer solve of a 3x3 system (symmetric positive definite here)."""
    det = (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )
    if abs(det) < 1e-15:
        return (0.0, 0.0, 0.0)
    dx = (
        b[0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (b[1] * a[2][2] - a[1][2] * b[2])
        + a[0][2] * (b[1] * a[2][1] - a[1][1] * b[2])
    )
    dy = (
        a[0][0] * (b[1] * a[2][2] - a[1][2] * b[2])
        - b[0] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * b[2] - b[1] * a[2][0])
    )
    dz = (
        a[0][0] * (a[1][1] * b[2] - b[1] * a[2][1])
        - a[0][1] * (a[1][0] * b[2] - b[1] * a[2][0])
        + b[0] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )
    return (dx / det, dy / det, dz / det)


def _gaze_geometry(
    model: RobotModel, q: JointPose, target: Vec3
) -> tuple[float, Vec3, list[Vec3]]:
    """(angular error, rotation vector aligning gaze axis to bearing,
    task jacobian columns).

    Each column is z_i - (b x v_i)/dist: the joint's angular velocity
    minus the bearing rotation its end-effector translation induces.
    The second term matters for targets close to the arm."""
    frames = fk_frames(model, q)
    ee = frames[-1]
    p = (ee[0][3], ee[1][3], ee[2][3])
    g = (
        ee[0][0] * model.gaze_axis[0] + ee[0][1] * model.gaze_axis[1] + ee[0][2] * model.gaze_axis[2],
        ee[1][0] * model.gaze_axis[0] + ee[1][1] * model.gaze_axis[1] + ee[1][2] * model.gaze_axis[2],
        ee[2][0] * model.gaze_axis[0] + ee[2][1] * model.gaze_axis[1] + ee[2][2] * model.gaze_axis[2],
    )
    to_t = vec_sub(target, p)
    dist = vec_norm(to_t)
    if dist < 1e-9:
        return 0.0, (0.0, 0.0, 0.0), [(0.0, 0.0, 0.0)] * 6
    b = (to_t[0] / dist, to_t[1] / dist, to_t[2] / dist)
    axis = vec_cross(g, b)
    s = vec_norm(axis)
    angle = math.atan2(s, vec_dot(g, b))
    if s > 1e-12:
        err = (axis[0] / s * angle, axis[1] / s * angle, axis[2] / s * angle)
    elif angle > 1.0:  # anti-parallel: rotate about any perpendicular of g
        perp = vec_cross(g, (1.0, 0.0, 0.0))
        if vec_norm(perp) < 1e-6:
            perp = vec_cross(g, (0.0, 1.0, 0.0))
        n = vec_norm(perp)
        err = (perp[0] / n * angle, perp[1] / n * angle, perp[2] / n * angle)
    else:
        err = (0.0, 0.0, 0.0)
    # relative rotation of gaze axis wrt bearing per unit dq_i:
    # omega_g = z_i, omega_b = -(b x v_i)/dist, column = z_i - omega_b
    columns: list[Vec3] = []
    for f in frames[:6]:
        z = (f[0][2], f[1][2], f[2][2])
        origin = (f[0][3], f[1][3], f[2][3])
        v = vec_cross(z, vec_sub(p, origin))  # EE linear velocity per unit dq
        bxv = vec_cross(b, v)
        columns.append((z[0] + bxv[0] / dist, z[1] + bxv[1] / dist, z[2] + bxv[2] / dist))
    return angle, err, columns


def solve_gaze_pose(
    model: RobotModel,
    current: JointPose,
    target: Vec3,
    profile: ArousalProfile,
    cfg: MotionConfig = MotionConfig(),
) -> GazeSolution:
    """Iteratively find a joint setpoint whose gaze axis points at `target`.

    Damped weighted least squares on the 3-vector rotation error, with
    quadratic weights of ratio^2 on the proximal joints so distal joints
    are recruited first, plus a null-space pull toward the arousal base
    posture scaled by reach_scale. Respects joint limits. Targets inside
    the exclusion ball around the end-effector are rejected.
    """
    for v in target:
        if not math.isfinite(v):
            raise ValueError(f"gaze target must be finite, got {target}")
    frames = fk_frames(model, current)
    ee = frames[-1]
    if vec_norm(vec_sub(target, (ee[0][3], ee[1][3], ee[2][3]))) < cfg.gaze_exclusion_m:
        raise ValueError("gaze target inside the exclusion ball around the end-effector")

    ratio = cfg.proximal_weight_ratio
    w_inv = (1.0 / ratio**2, 1.0 / ratio**2, 1.0 / ratio**2, 1.0, 1.0, 1.0)
    lam2 = cfg.solver_damping**2
    tol = math.radians(cfg.solver_tolerance_deg)
    posture = posture_setpoint(model, profile)
    pull = cfg.null_space_gain * profile.reach_scale

    q = tuple(current)
    angle, err, cols = _gaze_geometry(model, q, target)
    iterations = 0
    for iterations in range(1, cfg.solver_max_iters + 1):
        if angle <= tol:
            break
        # A = J W^-1 J^T + lam^2 I  (3x3),  dq_task = W^-1 J^T A^-1 err
        a = [[lam2 if i == j else 0.0 for j in range(3)] for i in range(3)]
        for k in range(6):
            c = cols[k]
            wk = w_inv[k]
            for i in range(3):
                for j in range(3):
                    a[i][j] += wk * c[i] * c[j]
        y = _solve3(a, err)
        dq_task = [w_inv[k] * vec_dot(cols[k], y) for k in range(6)]
        # null-space posture pull: project the raw pull out of the task space
        raw = [pull * (posture[k] - q[k]) for k in range(6)]
        jraw = (
            sum(cols[k][0] * raw[k] for k in range(6)),
            sum(cols[k][1] * raw[k] for k in range(6)),
            sum(cols[k][2] * raw[k] for k in range(6)),
        )
        y2 = _solve3(a, jraw)
        dq = [
            dq_task[k] + raw[k] - w_inv[k] * vec_dot(cols[k], y2) for k in range(6)
        ]
        step = cfg.solver_step_limit
        dq = [min(max(v, -step), step) for v in dq]
        # backtracking: halve a step that would worsen the pointing error
        improved = False
        for _ in range(5):
            q_next = model.clamp_to_limits(tuple(q[k] + dq[k] for k in range(6)))
            next_angle, next_err, next_cols = _gaze_geometry(model, q_next, target)
            if next_angle < angle:
                q, angle, err, cols = q_next, next_angle, next_err, next_cols
                improved = True
                break
            dq = [v * 0.5 for v in dq]
        if not improved:
            break  # stalled: no descent direction at this scale

    return GazeSolution(
        pose=q,
        error_deg=math.degrees(angle),
        saturated=angle > math.radians(cfg.saturation_threshold_deg),
        iterations=iterations,
    )


# ---------- per-tick pose integration ----------


def rate_limit_toward(
    current: JointPose,
    setpoint: JointPose,
    profile: ArousalProfile,
    model: RobotModel,
    dt: float,
) -> JointPose:
    """Advance toward the setpoint at most speed_scale * joint limit per joint."""
    out = []
    for qi, si, vmax, (lo, hi) in zip(
        current, setpoint, model.joint_velocity_limits, model.joint_limits
    ):
        max_step = profile.speed_scale * vmax * dt
        delta = si - qi
        if delta > max_step:
            delta = max_step
        elif delta < -max_step:
            delta = -max_step
        out.append(min(max(qi + delta, lo), hi))
    return tuple(out)


def breathing_offset(profile: ArousalProfile, model: RobotModel, t: float) -> JointPose:
    """Sinusoidal breathing term per joint; the mask keeps it on the
    shoulder/elbow pair with opposed signs so the gaze aim is preserved."""
    s = math.sin(2.0 * math.pi * profile.breath_frequency * t)
    return tuple(profile.breath_amplitude * m * s for m in model.breathing_mask)


def apply_breathing(
    core: JointPose, profile: ArousalProfile, model: RobotModel, t: float
) -> JointPose:
    breath = breathing_offset(profile, model, t)
    return model.clamp_to_limits(tuple(c + b for c, b in zip(core, breath)))


def step_motion(
    current: JointPose,
    setpoint: JointPose,
    profile: ArousalProfile,
    model: RobotModel,
    t: float,
    dt: float,
) -> JointPose:
    """One motion tick: rate-limit toward the setpoint, then superimpose
    breathing and clamp to joint limits. `current` is the un-breathed
    core pose; callers integrating over ticks should keep the core via
    rate_limit_toward and emit via apply_breathing."""
    core = rate_limit_toward(current, setpoint, profile, model, dt)
    return apply_breathing(core, profile, model, t)
