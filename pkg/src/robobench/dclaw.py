"""Claw task families: joint posing, object turning, and velocity tracking.

The reward/score/success math lives in plain functions over arrays so it can
be checked directly against hand-transcribed formulas; the task classes wire
those functions to episode sampling and observation assembly.

Pose drives 9 joints to target angles (static target, or oscillating between
two sampled targets). Turn rotates the valve object to a target angle; Screw
tracks a target angle that advances at constant velocity. Angle bookkeeping:
Turn errors are wrapped to (-pi, pi]; Screw errors are unwrapped so lagging a
multi-turn target by a full revolution reads as a full revolution of error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from .core import EpisodeSetup, RobotState, Task
from .layout import Layout
from .robots import DCLAW, RobotSpec
from .rotations import wrap_angle

POSE_SUCCESS_THRESHOLD = math.radians(10.0)
TURN_SUCCESS_THRESHOLD = 0.1  # rad, final-step error
SCREW_SUCCESS_THRESHOLD = 0.1  # rad, mean error
VELOCITY_PENALTY_DEADBAND = 0.5  # rad/s; slower joint motion is free
BONUS_NEAR = 0.25  # rad: +10 inside this object error
BONUS_CLOSE = 0.1  # rad: +50 inside this object error
OSCILLATION_PERIOD = 4.0  # seconds, goal sweep for the moving-target variant

POSE_LAYOUT = Layout([
    ("joint_angles", 9),
    ("joint_velocities", 9),
    ("goal_error", 9),
    ("last_action", 9),
])

TURN_LAYOUT = Layout([
    ("joint_angles", 9),
    ("joint_velocities", 9),
    ("object_sincos", 2),
    ("object_error", 1),
])


# -- reward / success functions ------------------------------------------------


def pose_reward(qpos: np.ndarray, qvel: np.ndarray, goal: np.ndarray) -> float:
    """Tracking cost plus a speed penalty that ignores slow motion."""
    qpos = np.asarray(qpos, dtype=float)
    qvel = np.asarray(qvel, dtype=float)
    goal = np.asarray(goal, dtype=float)
    err = float(np.linalg.norm(goal - qpos))
    fast = qvel * (np.abs(qvel) > VELOCITY_PENALTY_DEADBAND)
    return -err - 0.1 * float(np.linalg.norm(fast))


def pose_goal_at(t: int, dt: float, g1: np.ndarray, g2: np.ndarray,
                 period: float = OSCILLATION_PERIOD) -> np.ndarray:
    """Sinusoidal sweep between the two sampled targets; t=0 is the midpoint."""
    mid = (np.asarray(g1, dtype=float) + np.asarray(g2, dtype=float)) / 2.0
    amp = (np.asarray(g2, dtype=float) - np.asarray(g1, dtype=float)) / 2.0
    return mid + amp * math.sin(2.0 * math.pi * t * dt / period)


def pose_success(mean_abs_errors: Sequence[float],
                 threshold: float = POSE_SUCCESS_THRESHOLD) -> bool:
    """Success iff the time average of per-step mean absolute error is under
    the threshold."""
    errors = list(mean_abs_errors)
    if not errors:
        return False
    return float(np.mean(errors)) < threshold


def turn_reward(qpos: np.ndarray, qvel: np.ndarray, delta: float,
                nominal: np.ndarray) -> float:
    """Object error cost, posture and speed regularizers, two step bonuses."""
    qpos = np.asarray(qpos, dtype=float)
    qvel = np.asarray(qvel, dtype=float)
    nominal = np.asarray(nominal, dtype=float)
    r = -5.0 * abs(delta)
    r -= float(np.linalg.norm(nominal - qpos))
    r -= float(np.linalg.norm(qvel))
    if abs(delta) < BONUS_NEAR:
        r += 10.0
    if abs(delta) < BONUS_CLOSE:
        r += 50.0
    return r


def turn_observation(qpos: np.ndarray, qvel: np.ndarray, object_angle: float,
                     delta: float) -> np.ndarray:
    obs = np.empty(21)
    obs[0:9] = qpos
    obs[9:18] = qvel
    obs[18] = math.sin(object_angle)
    obs[19] = math.cos(object_angle)
    obs[20] = delta
    return obs


def turn_success(deltas: Sequence[float],
                 threshold: float = TURN_SUCCESS_THRESHOLD) -> bool:
    """Success iff the final-step object error is under the threshold."""
    seq = list(deltas)
    if not seq:
        return False
    return abs(float(seq[-1])) < threshold


def screw_goal_update(goal_prev: float, desired_velocity: float,
                      dt: float) -> float:
    return goal_prev + desired_velocity * dt


def screw_success(deltas: Sequence[float],
                  threshold: float = SCREW_SUCCESS_THRESHOLD) -> bool:
    """Success iff the mean absolute object error is under the threshold."""
    seq = list(deltas)
    if not seq:
        return False
    return float(np.mean(np.abs(seq))) < threshold


# -- episode sampling ----------------------------------------------------------


def sample_claw_dynamics(rng: np.random.Generator) -> Dict[str, Any]:
    """Per-episode plant perturbations for the hardest variant level."""
    return {
        "joint_damping_scale": rng.uniform(0.8, 1.2, size=9),
        "joint_friction_loss": rng.uniform(0.0, 0.2, size=9),
        "object_scale": float(rng.uniform(0.9, 1.1)),
        "base_shift": [float(rng.uniform(-0.01, 0.01)),
                       float(rng.uniform(-0.01, 0.01))],
        "base_yaw": float(rng.uniform(-math.radians(5.0), math.radians(5.0))),
    }


class ClawPoseTask(Task):
    """Drive the 9 joints to target angles; moving target on Random levels."""

    family = "DClawPose"
    robot = "dclaw"
    layout = POSE_LAYOUT

    def __init__(self, level: str, spec: RobotSpec = DCLAW, dt: float = 0.1,
                 period: float = OSCILLATION_PERIOD):
        super().__init__(spec, level, dt)
        self.period = float(period)
        self._g1: Optional[np.ndarray] = None
        self._g2: Optional[np.ndarray] = None

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        lo, hi = self.spec.joint_lower, self.spec.joint_upper
        if self.level == "Fixed":
            goal = rng.uniform(lo, hi)
            self._g1 = self._g2 = goal
        else:
            self._g1 = rng.uniform(lo, hi)
            self._g2 = rng.uniform(lo, hi)
        dynamics = sample_claw_dynamics(rng) if self.level == "RandomDynamics" else None
        return EpisodeSetup(
            init_qpos=self.spec.reset_pose.copy(),
            dynamics=dynamics,
            goal_meta={
                "goal_start": self._g1,
                "goal_end": self._g2,
                "period": self.period,
            },
        )

    def goal_at(self, t: int) -> np.ndarray:
        if self.level == "Fixed":
            return self._g1
        return pose_goal_at(t, self.dt, self._g1, self._g2, self.period)

    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        goal = self.goal_at(t)
        obs = np.empty(36)
        obs[0:9] = state.qpos
        obs[9:18] = state.qvel
        obs[18:27] = goal - state.qpos
        obs[27:36] = last_action
        return obs

    def reward(self, state: RobotState, t: int) -> float:
        return pose_reward(state.qpos, state.qvel, self.goal_at(t))

    def score(self, state: RobotState, t: int) -> float:
        return -float(np.mean(np.abs(self.goal_at(t) - state.qpos)))

    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        err = float(np.mean(np.abs(self.goal_at(t) - state.qpos)))
        return {"mean_abs_error": err}

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        return pose_success([m["mean_abs_error"] for m in metrics_seq])


class ClawTurnTask(Task):
    """Rotate the valve to a target angle; error wraps to (-pi, pi]."""

    family = "DClawTurn"
    robot = "dclaw"
    layout = TURN_LAYOUT

    def __init__(self, level: str, spec: RobotSpec = DCLAW, dt: float = 0.1):
        super().__init__(spec, level, dt)
        self.nominal = spec.midrange
        self._initial_angle = 0.0
        self._goal_angle = 0.0

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        if self.level == "Fixed":
            self._initial_angle = 0.0
            self._goal_angle = math.pi
        else:
            self._initial_angle = float(rng.uniform(-math.pi, math.pi))
            self._goal_angle = float(rng.uniform(-math.pi, math.pi))
        dynamics = sample_claw_dynamics(rng) if self.level == "RandomDynamics" else None
        return EpisodeSetup(
            init_qpos=self.spec.reset_pose.copy(),
            object_angle=self._initial_angle,
            dynamics=dynamics,
            goal_meta={
                "object_initial": self._initial_angle,
                "object_goal": self._goal_angle,
            },
        )

    def object_error(self, state: RobotState, t: int) -> float:
        return wrap_angle(state.object_angle - self._goal_angle)

    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        return turn_observation(state.qpos, state.qvel, state.object_angle,
                                self.object_error(state, t))

    def reward(self, state: RobotState, t: int) -> float:
        return turn_reward(state.qpos, state.qvel,
                           self.object_error(state, t), self.nominal)

    def score(self, state: RobotState, t: int) -> float:
        return -abs(self.object_error(state, t))

    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        return {"object_error": self.object_error(state, t)}

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        return turn_success([m["object_error"] for m in metrics_seq])


class ClawScrewTask(ClawTurnTask):
    """Track a target angle advancing at constant velocity; error unwrapped."""

    family = "DClawScrew"

    def __init__(self, level: str, spec: RobotSpec = DCLAW, dt: float = 0.1):
        super().__init__(level, spec, dt)
        self._desired_velocity = 0.0

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        if self.level == "Fixed":
            self._initial_angle = 0.0
            self._desired_velocity = 0.5
        else:
            self._initial_angle = float(rng.uniform(-math.pi, math.pi))
            self._desired_velocity = float(rng.uniform(-0.75, 0.75))
        # The moving target starts at the object's initial angle.
        self._goal_angle = self._initial_angle
        dynamics = sample_claw_dynamics(rng) if self.level == "RandomDynamics" else None
        return EpisodeSetup(
            init_qpos=self.spec.reset_pose.copy(),
            object_angle=self._initial_angle,
            dynamics=dynamics,
            goal_meta={
                "object_initial": self._initial_angle,
                "desired_velocity": self._desired_velocity,
            },
        )

    def goal_angle_at(self, t: int) -> float:
        return self._initial_angle + self._desired_velocity * self.dt * t

    def object_error(self, state: RobotState, t: int) -> float:
        return state.object_angle - self.goal_angle_at(t)

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        return screw_success([m["object_error"] for m in metrics_seq])
