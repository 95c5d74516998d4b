"""Quadruped task families: stand, orient (turn in place), and walk.

All three share a 49-entry proprioceptive observation block, an uprightness
reward term, and early termination when uprightness drops below the task's
falling threshold (the falling penalty is collected exactly once, on the
terminating step). As with the claw module, the numeric formulas are plain
functions so tests can compare them against independent transcriptions.

Conventions: world z is up; torso y is "forward". The facing direction is the
torso y-axis projected to the ground plane; a facing angle of 0 means world
+y, and positive angles turn counterclockwise (toward -x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .core import EpisodeSetup, RobotState, Task
from .errors import ConfigurationError
from .layout import Layout
from .robots import DKITTY, RobotSpec
from .rotations import euler_xyz_from_matrix

STAND_SUCCESS_POSE = math.pi / 12.0
STAND_SUCCESS_UPRIGHT = 0.9
ORIENT_SUCCESS_ANGLE = math.radians(5.0)
ORIENT_SUCCESS_UPRIGHT = math.cos(math.radians(15.0))
WALK_SUCCESS_DISTANCE = 0.5
WALK_SUCCESS_UPRIGHT = math.cos(math.radians(25.0))

HEIGHT_FIELD_MAX = 0.05  # m
HEIGHT_FIELD_CELLS = 32
HEIGHT_FIELD_EXTENT = 4.0  # m, square arena side


@dataclass(frozen=True)
class UprightParams:
    """Shared uprightness reward shape: slope above the falling threshold,
    a one-off penalty below it."""

    alpha_upright: float
    alpha_falling: float
    beta: float  # cosine threshold; falling means u < beta (strict)

    def __post_init__(self):
        if not -1.0 <= self.beta <= 1.0:
            raise ConfigurationError("upright threshold must be a cosine in [-1, 1]")


STAND_UPRIGHT = UprightParams(2.0, -100.0, math.cos(math.pi / 2.0))
ORIENT_UPRIGHT = UprightParams(2.0, -500.0, math.cos(math.radians(25.0)))
WALK_UPRIGHT = UprightParams(1.0, -500.0, math.cos(math.radians(25.0)))


# -- shared terms ----------------------------------------------------------------


def uprightness(rotation: np.ndarray) -> float:
    """Cosine between the torso z-axis and world vertical: R_z . Z."""
    return float(np.asarray(rotation)[2, 2])


def upright_reward(u: float, params: UprightParams) -> float:
    r = params.alpha_upright * (u - params.beta) / (1.0 - params.beta)
    if u < params.beta:
        r += params.alpha_falling
    return r


def facing_direction(rotation: np.ndarray) -> np.ndarray:
    """Torso y-axis projected to the ground plane, unit length.

    Degenerate when the torso points straight up/down; the guard keeps the
    math finite, and in practice fall termination fires long before that.
    """
    y_axis = np.asarray(rotation)[:, 1]
    planar = y_axis[:2]
    norm = float(np.linalg.norm(planar))
    if norm < 1e-12:
        return np.array([0.0, 1.0])
    return planar / norm


def facing_angle_error(facing: np.ndarray, goal_facing: np.ndarray) -> float:
    dot = float(np.clip(np.dot(facing, goal_facing), -1.0, 1.0))
    return math.acos(dot)


def bearing_vector(angle: float) -> np.ndarray:
    """Unit direction for a facing angle (0 = world +y, positive turns
    counterclockwise)."""
    return np.array([-math.sin(angle), math.cos(angle)])


def stand_reward(u: float, pose_error_mean: float, planar_distance: float,
                 params: UprightParams = STAND_UPRIGHT) -> float:
    r = upright_reward(u, params)
    r -= 4.0 * pose_error_mean
    r -= 2.0 * planar_distance
    if pose_error_mean < math.pi / 6.0:
        r += 5.0 * u
    if pose_error_mean < math.pi / 12.0:
        r += 10.0 * u
    return r


def stand_success(final_pose_error: float, final_u: float) -> bool:
    return final_pose_error < STAND_SUCCESS_POSE and final_u > STAND_SUCCESS_UPRIGHT


def orient_reward(u: float, facing_error: float, planar_distance: float,
                  params: UprightParams = ORIENT_UPRIGHT) -> float:
    r = upright_reward(u, params)
    r -= 4.0 * facing_error
    r -= 4.0 * planar_distance
    upright_enough = u > math.cos(math.radians(15.0))
    if facing_error < math.radians(15.0) or upright_enough:
        r += 5.0
    if facing_error < math.radians(5.0) and upright_enough:
        r += 10.0
    return r


def orient_success(final_facing_error: float, final_u: float) -> bool:
    return (final_facing_error < ORIENT_SUCCESS_ANGLE
            and final_u > ORIENT_SUCCESS_UPRIGHT)


def walk_heading(position_xy: np.ndarray, rotation: np.ndarray,
                 goal_xy: np.ndarray) -> Tuple[float, float]:
    """(distance to goal, heading alignment).

    Alignment is the torso y-axis dotted with the unit ground-plane vector
    toward the goal; at the goal itself heading is moot and pinned to 1.
    """
    offset = np.asarray(goal_xy, dtype=float) - np.asarray(position_xy, dtype=float)[:2]
    d = float(np.linalg.norm(offset))
    if d < 1e-6:
        return d, 1.0
    y_axis = np.asarray(rotation)[:2, 1]
    h = float(np.dot(y_axis, offset / d))
    return d, h


def walk_reward(u: float, distance: float, heading: float,
                params: UprightParams = WALK_UPRIGHT) -> float:
    r = upright_reward(u, params)
    r -= 4.0 * distance
    r += 2.0 * heading
    near = distance < WALK_SUCCESS_DISTANCE
    aligned = heading > math.cos(math.radians(25.0))
    if near or aligned:
        r += 5.0
    if near and aligned:
        r += 10.0
    return r


def walk_success(final_distance: float, final_u: float) -> bool:
    return (final_distance < WALK_SUCCESS_DISTANCE
            and final_u > WALK_SUCCESS_UPRIGHT)


def shared_observation(state: RobotState, last_action: np.ndarray) -> np.ndarray:
    """The 49-entry proprioceptive block common to all quadruped tasks."""
    obs = np.empty(49)
    obs[0:3] = state.base_position
    obs[3:6] = euler_xyz_from_matrix(state.base_rotation)
    obs[6:9] = state.base_linear_velocity
    obs[9:12] = state.base_angular_velocity
    obs[12:24] = state.qpos
    obs[24:36] = state.qvel
    obs[36:48] = last_action
    obs[48] = uprightness(state.base_rotation)
    return obs


def sample_kitty_dynamics(rng: np.random.Generator) -> Dict[str, Any]:
    """Plant perturbations plus a bumpy ground patch for the hardest level."""
    return {
        "joint_gain_scale": rng.uniform(0.8, 1.2, size=12),
        "joint_damping_scale": rng.uniform(0.8, 1.2, size=12),
        "joint_friction_loss": rng.uniform(0.0, 0.2, size=12),
        "geom_friction_scale": float(rng.uniform(0.8, 1.2)),
        "mass_scale": float(rng.uniform(0.8, 1.2)),
        "terrain": rng.uniform(
            0.0, HEIGHT_FIELD_MAX, size=(HEIGHT_FIELD_CELLS, HEIGHT_FIELD_CELLS)
        ),
    }


_SHARED_FIELDS = [
    ("torso_position", 3),
    ("torso_euler", 3),
    ("torso_linear_velocity", 3),
    ("torso_angular_velocity", 3),
    ("joint_angles", 12),
    ("joint_velocities", 12),
    ("last_action", 12),
    ("uprightness", 1),
]


class KittyTask(Task):
    """Common quadruped behavior: upright term and fall termination."""

    robot = "dkitty"
    upright: UprightParams

    def is_fallen(self, state: RobotState) -> bool:
        return uprightness(state.base_rotation) < self.upright.beta

    def _maybe_dynamics(self, rng: np.random.Generator) -> Optional[Dict[str, Any]]:
        if self.level == "RandomDynamics":
            return sample_kitty_dynamics(rng)
        return None


class KittyStandTask(KittyTask):
    """Reach the standing pose (all joints at zero) and stay upright."""

    family = "DKittyStand"
    upright = STAND_UPRIGHT
    layout = Layout(_SHARED_FIELDS + [("pose_error", 12)])

    def __init__(self, level: str, spec: RobotSpec = DKITTY, dt: float = 0.1):
        super().__init__(spec, level, dt)
        self.goal_pose = np.zeros(12)

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        if self.level == "Fixed":
            init = self.spec.reset_pose.copy()
        else:
            # Random initial pose: uniform over the middle half of each
            # joint's range, which keeps the quasi-static start stable.
            mid = self.spec.midrange
            half = (self.spec.joint_upper - self.spec.joint_lower) / 2.0
            init = rng.uniform(mid - 0.5 * half, mid + 0.5 * half)
        return EpisodeSetup(
            init_qpos=init,
            dynamics=self._maybe_dynamics(rng),
            goal_meta={"goal_pose": self.goal_pose},
        )

    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        obs = np.empty(61)
        obs[0:49] = shared_observation(state, last_action)
        obs[49:61] = self.goal_pose - state.qpos
        return obs

    def _errors(self, state: RobotState) -> Tuple[float, float, float]:
        pose_err = float(np.mean(np.abs(self.goal_pose - state.qpos)))
        u = uprightness(state.base_rotation)
        planar = float(np.linalg.norm(state.base_position[:2]))
        return pose_err, u, planar

    def reward(self, state: RobotState, t: int) -> float:
        pose_err, u, planar = self._errors(state)
        return stand_reward(u, pose_err, planar, self.upright)

    def score(self, state: RobotState, t: int) -> float:
        return -self._errors(state)[0]

    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        pose_err, u, _ = self._errors(state)
        return {"pose_error": pose_err, "uprightness": u}

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        if not metrics_seq:
            return False
        last = metrics_seq[-1]
        return stand_success(last["pose_error"], last["uprightness"])


class KittyOrientTask(KittyTask):
    """Turn in place to match a goal facing direction."""

    family = "DKittyOrient"
    upright = ORIENT_UPRIGHT
    layout = Layout(_SHARED_FIELDS + [("facing", 2), ("goal_facing", 2)])

    def __init__(self, level: str, spec: RobotSpec = DKITTY, dt: float = 0.1):
        super().__init__(spec, level, dt)
        self.goal_facing = bearing_vector(math.pi)

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        if self.level == "Fixed":
            initial_angle = 0.0
            goal_angle = math.pi
        else:
            initial_angle = float(rng.uniform(-math.radians(60), math.radians(60)))
            goal_angle = float(rng.uniform(math.radians(120), math.radians(240)))
        self.goal_facing = bearing_vector(goal_angle)
        return EpisodeSetup(
            init_qpos=self.spec.reset_pose.copy(),
            base_yaw=initial_angle,
            dynamics=self._maybe_dynamics(rng),
            goal_meta={
                "initial_facing_angle": initial_angle,
                "goal_facing_angle": goal_angle,
                "goal_facing": self.goal_facing,
            },
        )

    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        obs = np.empty(53)
        obs[0:49] = shared_observation(state, last_action)
        obs[49:51] = facing_direction(state.base_rotation)
        obs[51:53] = self.goal_facing
        return obs

    def _errors(self, state: RobotState) -> Tuple[float, float, float]:
        e = facing_angle_error(facing_direction(state.base_rotation),
                               self.goal_facing)
        u = uprightness(state.base_rotation)
        planar = float(np.linalg.norm(state.base_position[:2]))
        return e, u, planar

    def reward(self, state: RobotState, t: int) -> float:
        e, u, planar = self._errors(state)
        return orient_reward(u, e, planar, self.upright)

    def score(self, state: RobotState, t: int) -> float:
        return -self._errors(state)[0]

    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        e, u, _ = self._errors(state)
        return {"facing_error": e, "uprightness": u}

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        if not metrics_seq:
            return False
        last = metrics_seq[-1]
        return orient_success(last["facing_error"], last["uprightness"])


class KittyWalkTask(KittyTask):
    """Reach a ground-plane goal position while facing it."""

    family = "DKittyWalk"
    upright = WALK_UPRIGHT
    layout = Layout(_SHARED_FIELDS + [("heading", 1), ("goal_offset", 2)])

    def __init__(self, level: str, spec: RobotSpec = DKITTY, dt: float = 0.1):
        super().__init__(spec, level, dt)
        self.goal_xy = np.array([0.0, 2.0])

    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        if self.level == "Fixed":
            distance, angle = 2.0, 0.0
        else:
            distance = float(rng.uniform(1.0, 2.0))
            angle = float(rng.uniform(-math.radians(60), math.radians(60)))
        self.goal_xy = distance * bearing_vector(angle)
        return EpisodeSetup(
            init_qpos=self.spec.reset_pose.copy(),
            dynamics=self._maybe_dynamics(rng),
            goal_meta={
                "goal_position": self.goal_xy,
                "goal_distance": distance,
                "goal_angle": angle,
            },
        )

    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        _, h = walk_heading(state.base_position, state.base_rotation, self.goal_xy)
        obs = np.empty(52)
        obs[0:49] = shared_observation(state, last_action)
        obs[49] = h
        obs[50:52] = self.goal_xy - state.base_position[:2]
        return obs

    def reward(self, state: RobotState, t: int) -> float:
        d, h = walk_heading(state.base_position, state.base_rotation, self.goal_xy)
        return walk_reward(uprightness(state.base_rotation), d, h, self.upright)

    def score(self, state: RobotState, t: int) -> float:
        d, _ = walk_heading(state.base_position, state.base_rotation, self.goal_xy)
        return -d

    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        d, h = walk_heading(state.base_position, state.base_rotation, self.goal_xy)
        return {
            "goal_distance": d,
            "heading": h,
            "uprightness": uprightness(state.base_rotation),
        }

    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        if not metrics_seq:
            return False
        last = metrics_seq[-1]
        return walk_success(last["goal_distance"], last["uprightness"])
