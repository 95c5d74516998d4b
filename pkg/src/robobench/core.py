"""Shared contracts between tasks, backends, and the environment engine.

A backend reports measured robot state; a task turns that state into
observations, rewards, scores, and success judgments. Tasks are stateful only
per-episode (the sampled goal), and every randomized quantity is drawn from
the RNG handed to ``sample_episode`` so episodes replay exactly.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .layout import Layout
from .robots import RobotSpec


@dataclass
class RobotState:
    """One measured snapshot. Base-pose fields are None for the claw."""

    qpos: np.ndarray
    qvel: np.ndarray
    current: np.ndarray
    object_angle: float = 0.0  # valve angle, unwrapped radians
    object_velocity: float = 0.0
    base_position: Optional[np.ndarray] = None  # (3,), meters
    base_rotation: Optional[np.ndarray] = None  # (3, 3) world-from-torso
    base_linear_velocity: Optional[np.ndarray] = None  # (3,), m/s
    base_angular_velocity: Optional[np.ndarray] = None  # (3,), rad/s


@dataclass
class EpisodeSetup:
    """Everything a backend needs to start an episode, plus log metadata."""

    init_qpos: np.ndarray
    object_angle: float = 0.0
    base_xy: tuple = (0.0, 0.0)
    base_yaw: float = 0.0
    dynamics: Optional[Dict[str, Any]] = None  # backend parameter overrides
    goal_meta: Dict[str, Any] = field(default_factory=dict)


class Task(ABC):
    """One benchmark task: goal sampling plus the per-step math."""

    family: str
    level: str
    robot: str  # "dclaw" | "dkitty"
    layout: Layout

    def __init__(self, spec: RobotSpec, level: str, dt: float):
        self.spec = spec
        self.level = level
        self.dt = float(dt)

    @property
    def name(self) -> str:
        return f"{self.family}{self.level}"

    @property
    def action_dim(self) -> int:
        return self.spec.num_joints

    @property
    def observation_dim(self) -> int:
        return len(self.layout)

    @abstractmethod
    def sample_episode(self, rng: np.random.Generator) -> EpisodeSetup:
        """Draw goals (and dynamics overrides, if applicable) for a new episode."""

    @abstractmethod
    def observe(self, state: RobotState, last_action: np.ndarray,
                t: int) -> np.ndarray:
        ...

    @abstractmethod
    def reward(self, state: RobotState, t: int) -> float:
        ...

    @abstractmethod
    def score(self, state: RobotState, t: int) -> float:
        """Sparse objective: negated primary error, always <= 0."""

    @abstractmethod
    def metrics(self, state: RobotState, t: int) -> Dict[str, float]:
        """Per-step error terms; the success judgment reads only these."""

    @abstractmethod
    def success(self, metrics_seq: Sequence[Dict[str, float]]) -> bool:
        """Episode success from the per-step metrics sequence."""

    def is_fallen(self, state: RobotState) -> bool:
        """Early-termination test; only the quadruped tasks override this."""
        return False
