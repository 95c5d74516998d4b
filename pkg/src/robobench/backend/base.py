"""Robot backend contract shared by the simulator and the servo-bus driver."""

from __future__ import annotations

from abc import ABC, abstractmethod
from enum import Enum
from typing import Optional

import numpy as np

from ..core import EpisodeSetup, RobotState
from ..errors import UsageError
from ..robots import RobotSpec


class ControlMode(Enum):
    TORQUE = "torque"
    VELOCITY = "velocity"
    POSITION = "position"
    EXTENDED_POSITION = "extended_position"
    CURRENT = "current"
    PWM = "pwm"


class RobotBackend(ABC):
    """Uniform plant interface: latch a command, advance time, read state.

    A backend instance belongs to one environment at a time; calls on it are
    never made concurrently. ``reset`` restores nominal plant parameters
    before applying any per-episode dynamics overrides carried by the setup.
    """

    def __init__(self, spec: RobotSpec, mode: ControlMode = ControlMode.POSITION):
        self.spec = spec
        self.mode = mode

    @property
    def robot(self) -> str:
        return self.spec.name

    def check_command(self, mode: ControlMode, values: np.ndarray) -> np.ndarray:
        if mode != self.mode:
            raise UsageError(
                f"backend is configured for {self.mode.value} control, "
                f"got a {mode.value} command"
            )
        values = np.asarray(values, dtype=float)
        if values.shape != (self.spec.num_joints,):
            raise UsageError(
                f"expected {self.spec.num_joints} command values, "
                f"got shape {values.shape}"
            )
        return values

    @abstractmethod
    def reset(self, setup: EpisodeSetup) -> RobotState:
        ...

    @abstractmethod
    def write_command(self, mode: ControlMode, values: np.ndarray) -> None:
        ...

    @abstractmethod
    def step(self, dt: float) -> RobotState:
        ...

    @abstractmethod
    def read_state(self) -> RobotState:
        ...

    def close(self) -> None:
        pass
