"""Hardware-safety counters.

Three per-step counts over the measured joint state, evaluated after the
actuators have moved:

* position: joints within ``margin`` radians of either travel limit; a joint
  pinned inside a narrow range can trip both limits at once and counts twice
* velocity: joints whose measured speed exceeds their per-joint cap
* current: joints whose measured current magnitude exceeds their per-joint cap

All thresholds are strict (a reading exactly at the cap does not count).
Episode aggregates are reported both as raw totals and as per-step averages so
runs of different lengths stay comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import ConfigurationError

DEFAULT_MARGIN = math.radians(5.0)


@dataclass(frozen=True)
class SafetyLimits:
    """Per-joint thresholds. All arrays share one length (the joint count)."""

    lower: np.ndarray
    upper: np.ndarray
    velocity_max: np.ndarray
    current_max: np.ndarray
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        vel = np.asarray(self.velocity_max, dtype=float)
        cur = np.asarray(self.current_max, dtype=float)
        n = lower.shape[0] if lower.ndim == 1 else -1
        for name, arr in (("lower", lower), ("upper", upper),
                          ("velocity_max", vel), ("current_max", cur)):
            if arr.ndim != 1 or arr.shape[0] != n:
                raise ConfigurationError(f"safety limits: {name} must be length-{n}")
        if np.any(upper <= lower):
            raise ConfigurationError("safety limits: upper must exceed lower")
        if np.any(vel <= 0) or np.any(cur <= 0):
            raise ConfigurationError("safety limits: caps must be positive")
        if not self.margin > 0:
            raise ConfigurationError("safety limits: margin must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "velocity_max", vel)
        object.__setattr__(self, "current_max", cur)

    @property
    def num_joints(self) -> int:
        return int(self.lower.shape[0])


@dataclass(frozen=True)
class SafetyCounts:
    """Violation counts for one step."""

    position: int
    velocity: int
    current: int

    def as_dict(self) -> Dict[str, int]:
        return {"position": self.position, "velocity": self.velocity,
                "current": self.current}


def count_step(limits: SafetyLimits, qpos, qvel, current) -> SafetyCounts:
    """Counts for one measured state (position rad, velocity rad/s, current A)."""
    qpos = np.asarray(qpos, dtype=float)
    qvel = np.asarray(qvel, dtype=float)
    current = np.asarray(current, dtype=float)
    n = limits.num_joints
    if qpos.shape != (n,) or qvel.shape != (n,) or current.shape != (n,):
        raise ConfigurationError(
            f"safety counters expect length-{n} state arrays"
        )
    near_lower = np.abs(qpos - limits.lower) < limits.margin
    near_upper = np.abs(qpos - limits.upper) < limits.margin
    pos = int(np.count_nonzero(near_lower)) + int(np.count_nonzero(near_upper))
    vel = int(np.count_nonzero(np.abs(qvel) > limits.velocity_max))
    cur = int(np.count_nonzero(np.abs(current) > limits.current_max))
    return SafetyCounts(position=pos, velocity=vel, current=cur)


@dataclass
class SafetyAccumulator:
    """Running totals over an episode (or a batch of episodes)."""

    steps: int = 0
    position: int = 0
    velocity: int = 0
    current: int = 0

    def add(self, counts: SafetyCounts) -> None:
        self.steps += 1
        self.position += counts.position
        self.velocity += counts.velocity
        self.current += counts.current

    def merge(self, other: "SafetyAccumulator") -> None:
        self.steps += other.steps
        self.position += other.position
        self.velocity += other.velocity
        self.current += other.current

    def totals(self) -> Dict[str, int]:
        return {"position": self.position, "velocity": self.velocity,
                "current": self.current}

    def per_step(self) -> Dict[str, float]:
        if self.steps == 0:
            return {"position": 0.0, "velocity": 0.0, "current": 0.0}
        return {k: v / self.steps for k, v in self.totals().items()}
