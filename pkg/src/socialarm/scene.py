"""World model: skeleton observations, virtual targets, and the arm's kinematics.

All kinematics here are deliberately pure Python (no numpy): the trace
replay guarantees require bit-identical arithmetic across machines, and
plain IEEE-754 float ops give us that where BLAS kernels may not.

Transforms are row-major 4x4 nested tuples. The Denavit-Hartenberg
convention is the standard one: each joint contributes
Rz(theta + offset) * Tz(d) * Tx(a) * Rx(alpha).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

Vec3 = tuple[float, float, float]
Mat4 = tuple[tuple[float, ...], ...]
JointPose = tuple[float, ...]


class ConfigError(ValueError):
    """A configuration value is out of its legal range."""


# ---------- rigid-transform helpers ----------

IDENTITY4: Mat4 = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
)


def mat_mul(a: Mat4, b: Mat4) -> Mat4:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(4)) for j in range(4))
        for i in range(4)
    )


def dh_transform(a: float, d: float, alpha: float, theta: float) -> Mat4:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return (
        (ct, -st * ca, st * sa, a * ct),
        (st, ct * ca, -ct * sa, a * st),
        (0.0, sa, ca, d),
        (0.0, 0.0, 0.0, 1.0),
    )


def transform_point(t: Mat4, p: Vec3) -> Vec3:
    x, y, z = p
    return (
        t[0][0] * x + t[0][1] * y + t[0][2] * z + t[0][3],
        t[1][0] * x + t[1][1] * y + t[1][2] * z + t[1][3],
        t[2][0] * x + t[2][1] * y + t[2][2] * z + t[2][3],
    )


def rotate_vector(t: Mat4, v: Vec3) -> Vec3:
    x, y, z = v
    return (
        t[0][0] * x + t[0][1] * y + t[0][2] * z,
        t[1][0] * x + t[1][1] * y + t[1][2] * z,
        t[2][0] * x + t[2][1] * y + t[2][2] * z,
    )


def pose_matrix(xyz: Vec3, rpy: Vec3) -> Mat4:
    """Rigid transform from translation and roll/pitch/yaw (extrinsic x-y-z)."""
    cr, sr = math.cos(rpy[0]), math.sin(rpy[0])
    cp, sp = math.cos(rpy[1]), math.sin(rpy[1])
    cy, sy = math.cos(rpy[2]), math.sin(rpy[2])
    return (
        (cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr, xyz[0]),
        (sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr, xyz[1]),
        (-sp, cp * sr, cp * cr, xyz[2]),
        (0.0, 0.0, 0.0, 1.0),
    )


def vec_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vec_norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def vec_dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vec_cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


# ---------- domain types ----------


@dataclass(frozen=True)
class SkeletonObservation:
    """One person's torso/hand state at a tick.

    `left_hand_raised` / `right_hand_raised` are normally None, in which
    case "raised" means the hand sits above `shoulder_height`. Ingesters
    of recorded (noisy) streams store debounced flags here instead.
    """

    person_id: int
    t: float
    torso_pos: Vec3
    torso_vel: Vec3
    left_hand_pos: Vec3
    right_hand_pos: Vec3
    left_hand_vel: Vec3
    right_hand_vel: Vec3
    shoulder_height: float
    left_hand_raised: bool | None = None
    right_hand_raised: bool | None = None

    @property
    def left_raised(self) -> bool:
        if self.left_hand_raised is not None:
            return self.left_hand_raised
        return self.left_hand_pos[2] > self.shoulder_height

    @property
    def right_raised(self) -> bool:
        if self.right_hand_raised is not None:
            return self.right_hand_raised
        return self.right_hand_pos[2] > self.shoulder_height


@dataclass(frozen=True)
class VirtualTarget:
    target_id: int
    pos: Vec3
    born_at: float
    lifespan: float
    kind: str  # "idle" | "drift"

    def expired(self, t: float) -> bool:
        return t - self.born_at >= self.lifespan


@dataclass(frozen=True)
class RobotModel:
    """Kinematic description of the arm plus its expressive presets."""

    dh_parameters: tuple[tuple[float, float, float, float], ...]  # (a, d, alpha, theta_offset)
    joint_limits: tuple[tuple[float, float], ...]
    joint_velocity_limits: tuple[float, ...]
    base_pose: Mat4
    gaze_axis: Vec3
    hunched_preset: JointPose
    upright_preset: JointPose
    breathing_mask: tuple[float, ...]
    workspace_bounds: tuple[Vec3, Vec3]

    def __post_init__(self) -> None:
        n = len(self.dh_parameters)
        if n != 6:
            raise ConfigError(f"dh_parameters: expected 6 rows, got {n}")
        for i, (lo, hi) in enumerate(self.joint_limits):
            if not lo < hi:
                raise ConfigError(f"joint_limits[{i}]: min {lo} must be < max {hi}")
        if abs(vec_norm(self.gaze_axis) - 1.0) > 1e-9:
            raise ConfigError("gaze_axis: must have unit norm")

    @property
    def base_position(self) -> Vec3:
        return (self.base_pose[0][3], self.base_pose[1][3], self.base_pose[2][3])

    def clamp_to_limits(self, q: JointPose) -> JointPose:
        return tuple(
            min(max(qi, lo), hi) for qi, (lo, hi) in zip(q, self.joint_limits)
        )

    def within_limits(self, q: JointPose, tol: float = 0.0) -> bool:
        return all(
            lo - tol <= qi <= hi + tol for qi, (lo, hi) in zip(q, self.joint_limits)
        )


@dataclass(frozen=True)
class WorldState:
    tick: int
    time: float
    persons: tuple[SkeletonObservation, ...]
    virtual_targets: tuple[VirtualTarget, ...]
    robot_pose: JointPose


# ---------- forward kinematics ----------


def fk_frames(model: RobotModel, pose: JointPose) -> list[Mat4]:
    """World-frame transforms after the base and after each joint (7 entries)."""
    frames = [model.base_pose]
    t = model.base_pose
    for (a, d, alpha, offset), q in zip(model.dh_parameters, pose):
        t = mat_mul(t, dh_transform(a, d, alpha, q + offset))
        frames.append(t)
    return frames


def forward_kinematics(model: RobotModel, pose: JointPose) -> Mat4:
    """World-frame end-effector transform for a joint pose."""
    return fk_frames(model, pose)[-1]


def gaze_direction(model: RobotModel, pose: JointPose) -> tuple[Vec3, Vec3]:
    """(end-effector position, world-frame gaze axis) for a pose."""
    t = forward_kinematics(model, pose)
    return (t[0][3], t[1][3], t[2][3]), rotate_vector(t, model.gaze_axis)


def gaze_error_rad(model: RobotModel, pose: JointPose, target: Vec3) -> float:
    """Angle between the pose's gaze axis and the bearing to `target`."""
    origin, axis = gaze_direction(model, pose)
    to_target = vec_sub(target, origin)
    dist = vec_norm(to_target)
    if dist < 1e-12:
        return 0.0
    bearing = (to_target[0] / dist, to_target[1] / dist, to_target[2] / dist)
    cross = vec_cross(axis, bearing)
    return math.atan2(vec_norm(cross), vec_dot(axis, bearing))


# ---------- robot configuration ----------


def robot_model_from_dict(cfg: dict) -> RobotModel:
    try:
        dh = tuple(tuple(float(v) for v in row) for row in cfg["dh_parameters"])
        limits = tuple(tuple(float(v) for v in row) for row in cfg["joint_limits"])
        vel = tuple(float(v) for v in cfg["joint_velocity_limits"])
        base = cfg.get("base_pose", {})
        base_pose = pose_matrix(
            tuple(float(v) for v in base.get("xyz", (0.0, 0.0, 0.0))),
            tuple(float(v) for v in base.get("rpy", (0.0, 0.0, 0.0))),
        )
        gaze = tuple(float(v) for v in cfg.get("gaze_axis", (0.0, 0.0, 1.0)))
        presets = cfg.get("posture_presets", {})
        hunched = tuple(float(v) for v in presets["hunched"])
        upright = tuple(float(v) for v in presets["upright"])
        mask = tuple(float(v) for v in cfg.get("breathing_mask", (0.0, 1.0, -1.0, 0.0, 0.0, 0.0)))
        bounds = cfg.get("workspace_bounds", {})
        ws = (
            tuple(float(v) for v in bounds.get("min", (-5.0, -5.0, -0.5))),
            tuple(float(v) for v in bounds.get("max", (5.0, 5.0, 3.0))),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"robot config: missing or malformed field: {exc}") from exc
    return RobotModel(
        dh_parameters=dh,
        joint_limits=limits,
        joint_velocity_limits=vel,
        base_pose=base_pose,
        gaze_axis=gaze,
        hunched_preset=hunched,
        upright_preset=upright,
        breathing_mask=mask,
        workspace_bounds=ws,
    )


def load_robot_config(path: str | None = None) -> RobotModel:
    """Load a robot model from JSON; default is the bundled UR5e-like arm."""
    if path is None:
        text = resources.files("socialarm.data").joinpath("ur5e_like.json").read_text()
    else:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    return robot_model_from_dict(json.loads(text))
