"""Physical descriptions of the two robots.

The numbers here are deployment calibration, not physics ground truth: joint
bounds and reset poses mirror the real platforms' safe operating ranges, and
the servo response/limit values come from the actuator datasheet profile
(stall current 2.3 A, rated speed 46 rpm ~ 4.8 rad/s). Everything is plain
data so a differently built unit can ship its own spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

from .errors import ConfigurationError
from .safety import DEFAULT_MARGIN, SafetyLimits


@dataclass(frozen=True)
class ServoParams:
    """First-order response model of one position-controlled servo."""

    time_constant: float = 0.1  # seconds to close ~63% of the error
    velocity_cap: float = 6.0  # rad/s, mechanical no-load ceiling
    current_gain: float = 2.0  # amperes drawn per radian of tracking error

    def __post_init__(self):
        if self.time_constant <= 0 or self.velocity_cap <= 0 or self.current_gain < 0:
            raise ConfigurationError("servo params must be positive")


@dataclass(frozen=True)
class ClawGeometry:
    """Three identical fingers around a vertical valve axis (object at origin)."""

    base_radius: float = 0.10  # finger mount distance from the valve axis, m
    base_height: float = 0.20  # finger mount height above the valve plane, m
    link1: float = 0.10  # upper finger segment, m
    link2: float = 0.12  # lower finger segment, m
    finger_azimuths: Tuple[float, float, float] = (
        math.radians(90.0),
        math.radians(210.0),
        math.radians(330.0),
    )
    valve_radius: float = 0.04  # handle contact radius, m
    valve_height: float = 0.05  # handle contact height, m


@dataclass(frozen=True)
class ValveParams:
    """Surrogate of the rotary object the claw manipulates."""

    inertia: float = 0.005  # kg m^2
    viscous_friction: float = 0.02  # N m s/rad
    coupling_gain: float = 1.5  # N m per (weighted m/s of fingertip sweep)
    radial_width: float = 0.03  # proximity falloff, radial, m
    vertical_width: float = 0.04  # proximity falloff, vertical, m

    def __post_init__(self):
        if self.inertia <= 0 or self.viscous_friction <= 0:
            raise ConfigurationError("valve inertia and friction must be positive")


@dataclass(frozen=True)
class KittyGeometry:
    """Four 3-DOF legs on a rectangular torso; feet are point contacts."""

    hip_x: float = 0.12  # m, hip offset along torso x (right positive)
    hip_y: float = 0.12  # m, hip offset along torso y (front positive)
    thigh: float = 0.11  # m
    shank: float = 0.13  # m

    def hip_positions(self) -> np.ndarray:
        """Torso-frame hip mounts, leg order: front-right, front-left,
        back-left, back-right."""
        return np.array(
            [
                [self.hip_x, self.hip_y, 0.0],
                [-self.hip_x, self.hip_y, 0.0],
                [-self.hip_x, -self.hip_y, 0.0],
                [self.hip_x, -self.hip_y, 0.0],
            ]
        )


@dataclass(frozen=True)
class RobotSpec:
    """Everything episode-invariant about one robot."""

    name: str
    num_joints: int
    joint_lower: np.ndarray
    joint_upper: np.ndarray
    reset_pose: np.ndarray
    servo: ServoParams
    safety: SafetyLimits

    def __post_init__(self):
        lower = np.asarray(self.joint_lower, dtype=float)
        upper = np.asarray(self.joint_upper, dtype=float)
        reset = np.asarray(self.reset_pose, dtype=float)
        n = self.num_joints
        if lower.shape != (n,) or upper.shape != (n,) or reset.shape != (n,):
            raise ConfigurationError(f"{self.name}: joint arrays must be length {n}")
        if np.any(upper <= lower):
            raise ConfigurationError(f"{self.name}: upper bounds must exceed lower")
        if np.any(reset < lower) or np.any(reset > upper):
            raise ConfigurationError(f"{self.name}: reset pose outside bounds")
        object.__setattr__(self, "joint_lower", lower)
        object.__setattr__(self, "joint_upper", upper)
        object.__setattr__(self, "reset_pose", reset)

    @property
    def midrange(self) -> np.ndarray:
        return (self.joint_lower + self.joint_upper) / 2.0

    def clamp(self, values: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=float),
                       self.joint_lower, self.joint_upper)


def _tile(per_joint: Tuple[float, ...], groups: int) -> np.ndarray:
    return np.array(list(per_joint) * groups, dtype=float)


# Datasheet-profile safety caps shared by both robots' actuators.
DATASHEET_VELOCITY_MAX = 4.8  # rad/s (46 rpm rated speed)
DATASHEET_CURRENT_MAX = 2.3  # A (stall current at 12 V)


def _default_safety(lower: np.ndarray, upper: np.ndarray,
                    margin: float = DEFAULT_MARGIN) -> SafetyLimits:
    n = lower.shape[0]
    return SafetyLimits(
        lower=lower,
        upper=upper,
        velocity_max=np.full(n, DATASHEET_VELOCITY_MAX),
        current_max=np.full(n, DATASHEET_CURRENT_MAX),
        margin=margin,
    )


def make_dclaw_spec(servo: ServoParams = ServoParams()) -> RobotSpec:
    """9 joints: three fingers of (base yaw, upper pitch, lower pitch)."""
    lower = _tile((-0.45, -1.35, -1.35), 3)
    upper = _tile((0.45, 1.35, 1.35), 3)
    reset = np.zeros(9)
    return RobotSpec(
        name="dclaw",
        num_joints=9,
        joint_lower=lower,
        joint_upper=upper,
        reset_pose=reset,
        servo=servo,
        safety=_default_safety(lower, upper),
    )


def make_dkitty_spec(servo: ServoParams = ServoParams()) -> RobotSpec:
    """12 joints: four legs of (hip roll, hip pitch, knee pitch).

    The reset pose is a stable crouch; the all-zero pose is standing with legs
    straight under the hips.
    """
    lower = _tile((-0.5, -1.6, -2.2), 4)
    upper = _tile((0.5, 1.6, 2.2), 4)
    reset = _tile((0.0, 0.9, -1.7), 4)
    return RobotSpec(
        name="dkitty",
        num_joints=12,
        joint_lower=lower,
        joint_upper=upper,
        reset_pose=reset,
        servo=servo,
        safety=_default_safety(lower, upper),
    )


DCLAW = make_dclaw_spec()
DKITTY = make_dkitty_spec()
CLAW_GEOMETRY = ClawGeometry()
VALVE = ValveParams()
KITTY_GEOMETRY = KittyGeometry()


def spec_for(robot: str) -> RobotSpec:
    if robot == "dclaw":
        return DCLAW
    if robot == "dkitty":
        return DKITTY
    raise ConfigurationError(f"unknown robot {robot!r}")
