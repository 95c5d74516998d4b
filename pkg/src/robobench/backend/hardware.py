"""Robot backend over the servo bus.

One bus transaction per control cycle: a sync write latching goal positions,
then a single sync read spanning present current/velocity/position (the three
registers are contiguous, so one 10-byte read per servo returns everything).
The valve object on the turning tasks is a torque-disabled servo on the same
chain, read but never driven; its reported angle is measured relative to the
episode start so resets do not require physically repositioning the object.

Quadruped torso pose cannot be derived from the bus: construction requires an
external ``pose_source`` callback (motion capture, IMU fusion, ...) returning
world position and rotation; velocities are finite-differenced host-side.
"""

from __future__ import annotations

import time
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core import EpisodeSetup, RobotState
from ..errors import ConfigurationError, TransportError, UsageError
from ..bus import packets
from ..bus.control_table import (
    CURRENT_UNIT_A,
    MODE_EXTENDED_POSITION,
    MODE_POSITION,
    VELOCITY_UNIT_RAD_S,
    XM_TABLE,
    ControlTable,
    radians_from_ticks,
    ticks_from_radians,
)
from ..bus.packets import Frame, FrameDecoder
from ..robots import RobotSpec
from ..rotations import rotation_to_rotvec
from .base import ControlMode, RobotBackend
from .transport import Transport

# present_current (2) + present_velocity (4) + present_position (4)
_STATE_ADDRESS = 126
_STATE_SIZE = 10

PoseSource = Callable[[], Tuple[np.ndarray, np.ndarray]]


class ServoBus:
    """Transaction layer: one outstanding instruction, demux by servo id."""

    def __init__(self, transport: Transport, timeout: float = 0.05,
                 retries: int = 2):
        self.transport = transport
        self.timeout = timeout
        self.retries = retries
        self._decoder = FrameDecoder()

    def close(self) -> None:
        self.transport.close()

    def transact(self, frame: Frame,
                 expect_ids: Sequence[int]) -> Dict[int, Frame]:
        """Send one instruction and collect one status frame per expected id.

        Retries the whole transaction on shortfall; raises naming the servos
        that never answered. Replies may arrive in any order or fragmentation.
        """
        expected = list(expect_ids)
        attempts = 0
        got: Dict[int, Frame] = {}
        while attempts <= self.retries:
            attempts += 1
            self.transport.send(packets.encode(frame))
            got.update(self._collect(set(expected) - set(got)))
            if all(i in got for i in expected):
                return {i: got[i] for i in expected}
        missing = [i for i in expected if i not in got]
        raise TransportError(
            f"no response from servo ids {missing}", retries=attempts
        )

    def _collect(self, wanted: set) -> Dict[int, Frame]:
        got: Dict[int, Frame] = {}
        deadline = time.monotonic() + self.timeout
        while wanted - set(got):
            remaining = deadline - time.monotonic()
            chunk = self.transport.receive(max(remaining, 0.0))
            if chunk:
                for reply in self._decoder.feed(chunk):
                    if reply.instruction == packets.STATUS and reply.device_id in wanted:
                        got[reply.device_id] = reply
            elif self.transport.synchronous or remaining <= 0:
                break
        return got

    def ping(self, servo_id: int) -> Frame:
        return self.transact(packets.ping(servo_id), [servo_id])[servo_id]

    def write_register(self, servo_id: int, table: ControlTable, name: str,
                       value: int) -> None:
        reg = table[name]
        frame = packets.write_request(servo_id, reg.address,
                                      table.encode(name, value))
        reply = self.transact(frame, [servo_id])[servo_id]
        error, _ = packets.parse_status(reply)
        if error:
            raise TransportError(
                f"servo {servo_id} rejected write to {name} (error {error:#x})"
            )

    def sync_write(self, address: int, size: int,
                   values: Dict[int, bytes]) -> None:
        self.transport.send(
            packets.encode(packets.sync_write_request(address, size, values))
        )

    def sync_read(self, ids: Sequence[int], address: int,
                  size: int) -> Dict[int, bytes]:
        frame = packets.sync_read_request(ids, address, size)
        replies = self.transact(frame, ids)
        out: Dict[int, bytes] = {}
        for servo_id, reply in replies.items():
            error, payload = packets.parse_status(reply)
            if error & ~packets.ERR_ALERT:
                raise TransportError(
                    f"servo {servo_id} read error {error:#x}"
                )
            if len(payload) != size:
                raise TransportError(
                    f"servo {servo_id} returned {len(payload)} bytes, wanted {size}"
                )
            out[servo_id] = payload
        return out


class BusServoBackend(RobotBackend):
    """Position-mode robot over a daisy chain of smart servos."""

    def __init__(
        self,
        spec: RobotSpec,
        transport: Transport,
        ids: Iterable[int],
        object_id: Optional[int] = None,
        pose_source: Optional[PoseSource] = None,
        table: ControlTable = XM_TABLE,
        settle_time: float = 3.0,
        settle_tolerance: float = 0.02,
    ):
        super().__init__(spec, ControlMode.POSITION)
        self.ids: List[int] = [int(i) for i in ids]
        if len(self.ids) != spec.num_joints:
            raise ConfigurationError(
                f"{spec.name} needs {spec.num_joints} servo ids, got {len(self.ids)}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ConfigurationError("duplicate servo ids")
        self.object_id = int(object_id) if object_id is not None else None
        if spec.name == "dkitty" and pose_source is None:
            raise ConfigurationError(
                "quadruped over the bus needs an external pose_source for the torso"
            )
        self.pose_source = pose_source
        self.table = table
        self.bus = ServoBus(transport)
        self._settle_time = settle_time
        self._settle_tolerance = settle_tolerance
        self._cmd_ticks: Optional[Dict[int, bytes]] = None
        self._object_offset = 0.0
        self._last_pose: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._pose_velocities = (np.zeros(3), np.zeros(3))
        self._dynamics_note: Optional[dict] = None
        self._configure()

    def _configure(self) -> None:
        for servo_id in self._all_ids():
            self.bus.ping(servo_id)
        for servo_id in self.ids:
            self.bus.write_register(servo_id, self.table, "torque_enable", 0)
            self.bus.write_register(servo_id, self.table, "operating_mode",
                                    MODE_POSITION)
            self.bus.write_register(servo_id, self.table, "torque_enable", 1)
        if self.object_id is not None:
            # The object is passive: multi-turn readout, never driven.
            self.bus.write_register(self.object_id, self.table, "torque_enable", 0)
            self.bus.write_register(self.object_id, self.table, "operating_mode",
                                    MODE_EXTENDED_POSITION)

    def _all_ids(self) -> List[int]:
        if self.object_id is None:
            return list(self.ids)
        return list(self.ids) + [self.object_id]

    # -- raw state -------------------------------------------------------------

    def _read_raw(self) -> Dict[int, bytes]:
        return self.bus.sync_read(self._all_ids(), _STATE_ADDRESS, _STATE_SIZE)

    @staticmethod
    def _parse_state(payload: bytes) -> Tuple[float, float, float]:
        current = int.from_bytes(payload[0:2], "little", signed=True)
        velocity = int.from_bytes(payload[2:6], "little", signed=True)
        position = int.from_bytes(payload[6:10], "little", signed=True)
        return (
            radians_from_ticks(position),
            velocity * VELOCITY_UNIT_RAD_S,
            current * CURRENT_UNIT_A,
        )

    def _object_angle_raw(self, raw: Dict[int, bytes]) -> float:
        pos, _, _ = self._parse_state(raw[self.object_id])
        return pos

    # -- backend interface ---------------------------------------------------------

    def reset(self, setup: EpisodeSetup) -> RobotState:
        if setup.dynamics:
            # Randomized plant parameters are a simulation feature; a physical
            # robot is its own dynamics. Recorded so logs stay honest.
            self._dynamics_note = {"ignored_on_hardware": sorted(setup.dynamics)}
        target = self.spec.clamp(np.asarray(setup.init_qpos, dtype=float))
        self.write_command(ControlMode.POSITION, target)
        self._dispatch()
        virtual = _is_virtual(self.bus.transport)
        deadline = time.monotonic() + self._settle_time
        max_settle_steps = max(1, int(round(self._settle_time / 0.1)))
        steps = 0
        while True:
            state = self._advance_and_read(0.1)
            steps += 1
            if np.max(np.abs(state.qpos - target)) < self._settle_tolerance:
                break
            timed_out = (steps >= max_settle_steps) if virtual \
                else (time.monotonic() > deadline)
            if timed_out:
                break
        if self.object_id is not None:
            raw = self._read_raw()
            measured = self._object_angle_raw(raw)
            self._object_offset = float(setup.object_angle) - measured
        if self.pose_source is not None:
            self._last_pose = None
            self._pose_velocities = (np.zeros(3), np.zeros(3))
        return self.read_state()

    def write_command(self, mode: ControlMode, values: np.ndarray) -> None:
        values = self.check_command(mode, values)
        clamped = self.spec.clamp(values)
        goal = self.table["goal_position"]
        self._cmd_ticks = {
            servo_id: self.table.encode("goal_position",
                                        ticks_from_radians(angle))
            for servo_id, angle in zip(self.ids, clamped)
        }
        self._goal_address = goal.address
        self._goal_size = goal.size

    def _dispatch(self) -> None:
        if self._cmd_ticks is not None:
            self.bus.sync_write(self._goal_address, self._goal_size,
                                self._cmd_ticks)

    def step(self, dt: float) -> RobotState:
        if dt <= 0:
            raise UsageError("dt must be positive")
        self._dispatch()
        return self._advance_and_read(dt)

    def _advance_and_read(self, dt: float) -> RobotState:
        advance = getattr(self.bus.transport, "advance", None)
        if advance is not None:
            advance(dt)
        else:
            time.sleep(dt)
        return self.read_state(dt_for_pose=dt)

    def read_state(self, dt_for_pose: Optional[float] = None) -> RobotState:
        raw = self._read_raw()
        n = self.spec.num_joints
        qpos = np.empty(n)
        qvel = np.empty(n)
        current = np.empty(n)
        for k, servo_id in enumerate(self.ids):
            qpos[k], qvel[k], current[k] = self._parse_state(raw[servo_id])
        state = RobotState(qpos=qpos, qvel=qvel, current=current)
        if self.object_id is not None:
            state.object_angle = self._object_angle_raw(raw) + self._object_offset
            vel_raw = int.from_bytes(raw[self.object_id][2:6], "little", signed=True)
            state.object_velocity = vel_raw * VELOCITY_UNIT_RAD_S
        if self.pose_source is not None:
            pos, rot = self.pose_source()
            pos = np.asarray(pos, dtype=float)
            rot = np.asarray(rot, dtype=float)
            linvel, angvel = np.zeros(3), np.zeros(3)
            if self._last_pose is not None and dt_for_pose:
                prev_pos, prev_rot = self._last_pose
                linvel = (pos - prev_pos) / dt_for_pose
                angvel = rotation_to_rotvec(rot @ prev_rot.T) / dt_for_pose
                self._pose_velocities = (linvel, angvel)
            else:
                linvel, angvel = self._pose_velocities
            if dt_for_pose:
                self._last_pose = (pos.copy(), rot.copy())
            state.base_position = pos
            state.base_rotation = rot
            state.base_linear_velocity = linvel
            state.base_angular_velocity = angvel
        return state

    def close(self) -> None:
        try:
            for servo_id in self.ids:
                self.bus.write_register(servo_id, self.table, "torque_enable", 0)
        except TransportError:
            pass
        self.bus.close()


def _is_virtual(transport: Transport) -> bool:
    return getattr(transport, "advance", None) is not None
