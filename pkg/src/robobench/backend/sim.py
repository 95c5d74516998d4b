"""Deterministic simulation backend.

Joints are independent first-order position servos: each step the velocity is
the tracking error over the time constant, capped at the no-load ceiling, and
integrated for dt. No contact dynamics are modeled; the two robot-specific
attachments are deliberate surrogates, documented here and in the README:

* Claw valve: a 1-DOF rotor driven by viscous coupling with the fingertips.
  Torque = gain * sum over fingers of (contact-zone proximity weight *
  tangential fingertip sweep speed) minus viscous drag. It is adequate to
  exercise the turning/tracking code paths deterministically, not to predict
  real contact behavior.

* Quadruped torso: quasi-static. Feet touching the ground become anchors;
  the torso pose is the least-squares rigid fit of the stance feet onto their
  anchors, with hysteresis on anchor acquisition/release. With fewer than 3
  stance feet the pose holds (flagged airborne). Displacement therefore comes
  only from stance-foot pinning, not momentum.

Dynamics overrides (per-episode randomization) rescale the nominal plant:
damping scales time constants up, gain scales them down, friction loss
lowers velocity ceilings, object scale resizes the valve, base shift/yaw
displace the claw relative to the valve, and a terrain grid bumps the ground.
Mass and geometry-friction scales are accepted and recorded but have no
effect in this model.
"""

from __future__ import annotations

import math
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core import EpisodeSetup, RobotState
from ..errors import ConfigurationError, UsageError
from ..kinematics import Terrain, fingertip_positions, foot_positions, rigid_fit
from ..robots import (
    CLAW_GEOMETRY,
    KITTY_GEOMETRY,
    VALVE,
    ClawGeometry,
    KittyGeometry,
    RobotSpec,
    ValveParams,
    spec_for,
)
from ..rotations import rot_z, rotation_to_rotvec
from .base import ControlMode, RobotBackend

LIFT_THRESHOLD = 0.015  # m above ground before a stance foot releases
CONTACT_THRESHOLD = 0.005  # m above ground before a free foot anchors

_INERT_OVERRIDES = ("geom_friction_scale", "mass_scale")


class SimBackend(RobotBackend):
    """First-order joint simulator with the valve / torso attachments."""

    def __init__(
        self,
        spec: RobotSpec,
        claw_geometry: ClawGeometry = CLAW_GEOMETRY,
        valve: ValveParams = VALVE,
        kitty_geometry: KittyGeometry = KITTY_GEOMETRY,
        base_motion: str = "quasi_static",
        replay: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ):
        super().__init__(spec, ControlMode.POSITION)
        self._geometry = claw_geometry
        self._valve = valve
        self._kitty_geometry = kitty_geometry
        if base_motion not in ("quasi_static", "replay"):
            raise ConfigurationError(f"unknown base motion model {base_motion!r}")
        if base_motion == "replay" and replay is None:
            raise ConfigurationError("replay base motion needs a pose trajectory")
        self._base_motion = base_motion
        self._replay = replay
        n = spec.num_joints
        self._qpos = spec.reset_pose.copy()
        self._qvel = np.zeros(n)
        self._current = np.zeros(n)
        self._cmd = spec.reset_pose.copy()
        self._nominal_tau = np.full(n, spec.servo.time_constant)
        self._nominal_vcap = np.full(n, spec.servo.velocity_cap)
        self._tau = self._nominal_tau.copy()
        self._vcap = self._nominal_vcap.copy()
        self._gain = spec.servo.current_gain
        self._extras: Dict[str, Any] = {}
        # Claw object state.
        self._obj_angle = 0.0
        self._obj_vel = 0.0
        self._obj_radius = claw_geometry.valve_radius
        self._obj_inertia = valve.inertia
        self._base_shift = (0.0, 0.0)
        self._base_yaw = 0.0
        # Quadruped base state.
        self._terrain = Terrain()
        self._rot = np.eye(3)
        self._pos = np.zeros(3)
        self._prev_rot = np.eye(3)
        self._prev_pos = np.zeros(3)
        self._linvel = np.zeros(3)
        self._angvel = np.zeros(3)
        self._anchors = np.zeros((4, 3))
        self._stance = np.zeros(4, dtype=bool)
        self._airborne = False
        self._step_index = 0

    # -- configuration ---------------------------------------------------------

    def _restore_nominal(self) -> None:
        self._tau = self._nominal_tau.copy()
        self._vcap = self._nominal_vcap.copy()
        self._obj_radius = self._geometry.valve_radius
        self._obj_inertia = self._valve.inertia
        self._base_shift = (0.0, 0.0)
        self._base_yaw = 0.0
        self._terrain = Terrain()
        self._extras = {}

    def _apply_dynamics(self, overrides: Dict[str, Any]) -> None:
        n = self.spec.num_joints
        for key, value in overrides.items():
            if key == "joint_damping_scale":
                self._tau = self._tau * np.broadcast_to(np.asarray(value, float), (n,))
            elif key == "joint_gain_scale":
                self._tau = self._tau / np.broadcast_to(np.asarray(value, float), (n,))
            elif key == "joint_friction_loss":
                loss = np.broadcast_to(np.asarray(value, float), (n,))
                self._vcap = self._vcap * (1.0 - 0.5 * loss)
            elif key == "object_scale":
                scale = float(value)
                self._obj_radius = self._geometry.valve_radius * scale
                self._obj_inertia = self._valve.inertia * scale * scale
            elif key == "base_shift":
                self._base_shift = (float(value[0]), float(value[1]))
            elif key == "base_yaw":
                self._base_yaw = float(value)
            elif key == "terrain":
                self._terrain = Terrain(np.asarray(value, dtype=float))
            elif key in _INERT_OVERRIDES:
                self._extras[key] = value
            else:
                raise ConfigurationError(f"unknown dynamics override {key!r}")

    # -- lifecycle ---------------------------------------------------------------

    def reset(self, setup: EpisodeSetup) -> RobotState:
        init = np.asarray(setup.init_qpos, dtype=float)
        if init.shape != (self.spec.num_joints,):
            raise UsageError(
                f"initial pose must have {self.spec.num_joints} entries"
            )
        self._restore_nominal()
        if setup.dynamics:
            self._apply_dynamics(setup.dynamics)
        self._qpos = self.spec.clamp(init)
        self._qvel = np.zeros_like(self._qpos)
        self._current = np.zeros_like(self._qpos)
        self._cmd = self._qpos.copy()
        self._obj_angle = float(setup.object_angle)
        self._obj_vel = 0.0
        self._step_index = 0
        if self.spec.name == "dkitty":
            self._reset_base(setup)
        return self.read_state()

    def _reset_base(self, setup: EpisodeSetup) -> None:
        self._rot = rot_z(setup.base_yaw)
        feet_local = foot_positions(self._qpos, self._kitty_geometry)
        feet_rot = feet_local @ self._rot.T
        xy = np.asarray(setup.base_xy, dtype=float)
        ground = np.array([
            self._terrain.height_at(f[0] + xy[0], f[1] + xy[1]) for f in feet_rot
        ])
        z = float(np.max(ground - feet_rot[:, 2]))
        self._pos = np.array([xy[0], xy[1], z])
        if self._base_motion == "replay":
            self._replay_pose(0)
        world = feet_rot + self._pos
        clearance = world[:, 2] - ground
        self._stance = clearance <= CONTACT_THRESHOLD
        self._anchors = world.copy()
        self._anchors[:, 2] = ground
        self._airborne = not np.any(self._stance)
        self._prev_rot = self._rot.copy()
        self._prev_pos = self._pos.copy()
        self._linvel = np.zeros(3)
        self._angvel = np.zeros(3)

    def _replay_pose(self, index: int) -> None:
        positions, rotations = self._replay
        k = min(index, len(positions) - 1)
        self._pos = np.asarray(positions[k], dtype=float).copy()
        self._rot = np.asarray(rotations[k], dtype=float).copy()

    # -- commands and stepping -----------------------------------------------------

    def write_command(self, mode: ControlMode, values: np.ndarray) -> None:
        values = self.check_command(mode, values)
        self._cmd = self.spec.clamp(values)

    def step(self, dt: float) -> RobotState:
        if dt <= 0:
            raise UsageError("dt must be positive")
        tips_before = None
        if self.spec.name == "dclaw":
            tips_before = fingertip_positions(
                self._qpos, self._geometry, self._base_shift, self._base_yaw
            )
        raw_vel = (self._cmd - self._qpos) / self._tau
        self._qvel = np.clip(raw_vel, -self._vcap, self._vcap)
        self._qpos = self.spec.clamp(self._qpos + self._qvel * dt)
        self._current = self._gain * np.abs(self._cmd - self._qpos)
        self._step_index += 1
        if self.spec.name == "dclaw":
            self._step_valve(tips_before, dt)
        else:
            self._step_base(dt)
        return self.read_state()

    def _step_valve(self, tips_before: np.ndarray, dt: float) -> None:
        tips_after = fingertip_positions(
            self._qpos, self._geometry, self._base_shift, self._base_yaw
        )
        tip_vel = (tips_after - tips_before) / dt
        drive = 0.0
        for f in range(3):
            x, y, z = tips_after[f]
            rho = math.hypot(x, y)
            radial_gap = (rho - self._obj_radius) / self._valve.radial_width
            vertical_gap = (z - self._geometry.valve_height) / self._valve.vertical_width
            weight = math.exp(-(radial_gap ** 2) - (vertical_gap ** 2))
            if rho > 1e-9:
                tangent = np.array([-y / rho, x / rho, 0.0])
                drive += weight * float(np.dot(tip_vel[f], tangent))
        torque = self._valve.coupling_gain * drive
        torque -= self._valve.viscous_friction * self._obj_vel
        self._obj_vel += dt * torque / self._obj_inertia
        self._obj_angle += dt * self._obj_vel

    def _step_base(self, dt: float) -> None:
        self._prev_rot = self._rot.copy()
        self._prev_pos = self._pos.copy()
        feet_local = foot_positions(self._qpos, self._kitty_geometry)
        if self._base_motion == "replay":
            self._replay_pose(self._step_index)
            self._airborne = False
        elif int(np.count_nonzero(self._stance)) >= 3:
            self._rot, self._pos = rigid_fit(
                feet_local[self._stance], self._anchors[self._stance]
            )
            self._airborne = False
        else:
            self._airborne = True  # pose held
        world = feet_local @ self._rot.T + self._pos
        ground = np.array([
            self._terrain.height_at(f[0], f[1]) for f in world
        ])
        clearance = world[:, 2] - ground
        for leg in range(4):
            if self._stance[leg] and clearance[leg] > LIFT_THRESHOLD:
                self._stance[leg] = False
            elif not self._stance[leg] and clearance[leg] <= CONTACT_THRESHOLD:
                self._stance[leg] = True
                self._anchors[leg] = (world[leg, 0], world[leg, 1], ground[leg])
        self._linvel = (self._pos - self._prev_pos) / dt
        self._angvel = rotation_to_rotvec(self._rot @ self._prev_rot.T) / dt

    # -- state -----------------------------------------------------------------------

    def read_state(self) -> RobotState:
        state = RobotState(
            qpos=self._qpos.copy(),
            qvel=self._qvel.copy(),
            current=self._current.copy(),
        )
        if self.spec.name == "dclaw":
            state.object_angle = self._obj_angle
            state.object_velocity = self._obj_vel
        else:
            state.base_position = self._pos.copy()
            state.base_rotation = self._rot.copy()
            state.base_linear_velocity = self._linvel.copy()
            state.base_angular_velocity = self._angvel.copy()
        return state

    @property
    def airborne(self) -> bool:
        return self._airborne

    @property
    def stance_mask(self) -> np.ndarray:
        return self._stance.copy()


def make_sim_backend(robot: str, **kwargs) -> SimBackend:
    return SimBackend(spec_for(robot), **kwargs)
