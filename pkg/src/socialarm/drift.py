"""Attentional drift: transient virtual gaze targets spawned at random.

Spawn probability per tick is rate * dt (per-tick Bernoulli), with the
rate interpolated linearly between the arousal-1 and arousal-10
endpoints. A live drift target suppresses further spawning, so at most
one exists at a time.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator

from .scene import ConfigError, Vec3, VirtualTarget


@dataclass(frozen=True)
class DriftConfig:
    rate_min: float = 0.02  # events/s at arousal 1
    rate_max: float = 0.2  # events/s at arousal 10
    lifespan_range: tuple[float, float] = (0.5, 2.0)
    spawn_radius: tuple[float, float] = (0.4, 0.8)  # radial band around base, m
    spawn_z: tuple[float, float] = (0.2, 0.9)  # vertical band above base, m

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate_min <= self.rate_max:
            raise ConfigError(
                f"drift.rate_min/rate_max: need 0 <= {self.rate_min} <= {self.rate_max}"
            )
        lo, hi = self.lifespan_range
        if not 0.0 < lo < hi:
            raise ConfigError(f"drift.lifespan_range: need 0 < {lo} < {hi}")
        if not 0.0 <= self.spawn_radius[0] < self.spawn_radius[1]:
            raise ConfigError("drift.spawn_radius: need 0 <= r_min < r_max")
        if self.spawn_z[0] >= self.spawn_z[1]:
            raise ConfigError("drift.spawn_z: need z_min < z_max")

    def validate_for_dt(self, dt: float) -> None:
        if self.rate_max * dt >= 0.5:
            raise ConfigError(
                f"drift.rate_max: rate_max*dt = {self.rate_max * dt:.3f} must stay below 0.5"
            )


def drift_rate(arousal: float, cfg: DriftConfig) -> float:
    """Spawn rate in events/s, linear in arousal across [1, 10]."""
    if not 1.0 <= arousal <= 10.0:
        raise ConfigError(f"arousal: must be within [1, 10], got {arousal}")
    return cfg.rate_min + (arousal - 1.0) / 9.0 * (cfg.rate_max - cfg.rate_min)


def step_drift(
    targets: list[VirtualTarget],
    arousal: float,
    cfg: DriftConfig,
    rng: random.Random,
    t: float,
    dt: float,
    base_pos: Vec3 = (0.0, 0.0, 0.0),
    ids: Iterator[int] | None = None,
) -> list[VirtualTarget]:
    """Expire dead targets, then maybe spawn one new drift target.

    Draw order is fixed for replay: no RNG is consumed while a live
    target suppresses spawning; a spawn consumes exactly five draws
    (gate, radius, azimuth, height, lifespan).
    """
    alive = [vt for vt in targets if not vt.expired(t)]
    if alive:
        return alive
    rate = drift_rate(arousal, cfg)
    if rng.random() >= rate * dt:
        return alive
    r = rng.uniform(*cfg.spawn_radius)
    az = rng.uniform(0.0, 2.0 * math.pi)
    z = rng.uniform(*cfg.spawn_z)
    lifespan = rng.uniform(*cfg.lifespan_range)
    pos = (
        base_pos[0] + r * math.cos(az),
        base_pos[1] + r * math.sin(az),
        base_pos[2] + z,
    )
    target_id = next(ids) if ids is not None else 0
    alive.append(
        VirtualTarget(target_id=target_id, pos=pos, born_at=t, lifespan=lifespan, kind="drift")
    )
    return alive
