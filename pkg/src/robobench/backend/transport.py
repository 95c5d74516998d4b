"""Byte transports for the servo bus: a POSIX serial port and a mock chain.

The mock transport emulates a daisy chain of servos at the register level:
instruction frames in, status frames out, byte-exact through the same codec
used by the driver. It advances in virtual time (``advance``), which keeps
hardware-path tests deterministic and fast. The serial transport is a thin
termios wrapper; rates follow the actuator's supported range but only the
standard POSIX constants are available (anything beyond 4 Mbps is rejected).
"""

from __future__ import annotations

import math
import os
import select
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional

from ..errors import ConfigurationError, TransportError
from ..robots import ServoParams
from ..bus import packets
from ..bus.control_table import (
    CURRENT_UNIT_A,
    VELOCITY_UNIT_RAD_S,
    XM_TABLE,
    radians_from_ticks,
    ticks_from_radians,
)
from ..bus.packets import Frame, FrameDecoder


class Transport(ABC):
    """One byte pipe to the chain. ``synchronous`` transports deliver every
    response during ``send``, so an empty ``receive`` means nothing is coming."""

    synchronous = False

    @abstractmethod
    def send(self, data: bytes) -> None:
        ...

    @abstractmethod
    def receive(self, timeout: float) -> bytes:
        ...

    def close(self) -> None:
        pass


_BAUD_MIN = 9_600
_BAUD_MAX = 4_500_000


def _termios_rate(baud: int):
    import termios

    name = f"B{baud}"
    if not _BAUD_MIN <= baud <= _BAUD_MAX:
        raise ConfigurationError(
            f"baud {baud} outside supported range {_BAUD_MIN}..{_BAUD_MAX}"
        )
    if not hasattr(termios, name):
        raise ConfigurationError(
            f"baud {baud} has no POSIX rate constant on this platform"
        )
    return getattr(termios, name)


class SerialTransport(Transport):
    """Raw 8N1 serial port."""

    def __init__(self, device: str, baud: int = 1_000_000):
        import termios

        rate = _termios_rate(baud)
        try:
            self._fd = os.open(device, os.O_RDWR | os.O_NOCTTY | os.O_NONBLOCK)
        except OSError as exc:
            raise TransportError(f"cannot open serial device {device}: {exc}")
        try:
            attrs = termios.tcgetattr(self._fd)
        except termios.error as exc:
            os.close(self._fd)
            raise TransportError(f"{device} is not a serial device: {exc}")
        iflag, oflag, cflag, lflag, ispeed, ospeed, cc = attrs
        iflag = 0
        oflag = 0
        lflag = 0
        cflag = termios.CS8 | termios.CREAD | termios.CLOCAL
        cc = list(cc)
        cc[termios.VMIN] = 0
        cc[termios.VTIME] = 0
        termios.tcsetattr(
            self._fd, termios.TCSANOW, [iflag, oflag, cflag, lflag, rate, rate, cc]
        )
        termios.tcflush(self._fd, termios.TCIOFLUSH)

    def send(self, data: bytes) -> None:
        try:
            os.write(self._fd, data)
        except OSError as exc:
            raise TransportError(f"serial write failed: {exc}")

    def receive(self, timeout: float) -> bytes:
        ready, _, _ = select.select([self._fd], [], [], max(timeout, 0.0))
        if not ready:
            return b""
        try:
            return os.read(self._fd, 4096)
        except OSError as exc:
            raise TransportError(f"serial read failed: {exc}")

    def close(self) -> None:
        if self._fd >= 0:
            os.close(self._fd)
            self._fd = -1


class _MockServo:
    """Register bank plus a first-order actuator behind it."""

    def __init__(self, servo_id: int, params: ServoParams):
        self.servo_id = servo_id
        self.params = params
        self.bank = bytearray(160)
        for reg in XM_TABLE.names():
            spec = XM_TABLE[reg]
            self.bank[spec.address : spec.address + spec.size] = XM_TABLE.encode(
                reg, spec.default
            )
        self.position = 0.0  # shadow float, radians; registers hold the ticks

    def read_reg(self, name: str) -> int:
        spec = XM_TABLE[name]
        return XM_TABLE.decode(name, bytes(self.bank[spec.address : spec.address + spec.size]))

    def write_reg(self, name: str, value: int) -> None:
        spec = XM_TABLE[name]
        self.bank[spec.address : spec.address + spec.size] = XM_TABLE.encode(name, value)

    def advance(self, dt: float) -> None:
        if not self.read_reg("torque_enable"):
            self.write_reg("present_velocity", 0)
            self.write_reg("present_current", 0)
            return
        goal = radians_from_ticks(self.read_reg("goal_position"))
        error = goal - self.position
        velocity = max(-self.params.velocity_cap,
                       min(self.params.velocity_cap, error / self.params.time_constant))
        self.position += velocity * dt
        error_after = goal - self.position
        self.write_reg("present_position", ticks_from_radians(self.position))
        self.write_reg("present_velocity", int(round(velocity / VELOCITY_UNIT_RAD_S)))
        current = self.params.current_gain * abs(error_after)
        self.write_reg("present_current", int(round(current / CURRENT_UNIT_A)))
        tick = (self.read_reg("realtime_tick") + int(round(dt * 1000.0))) % 32768
        self.write_reg("realtime_tick", tick)
        self.write_reg("moving", 1 if abs(velocity) > 1e-6 else 0)


class MockServoTransport(Transport):
    """A virtual daisy chain: parses instruction frames, answers with status
    frames, and integrates servo motion on ``advance``."""

    synchronous = True

    def __init__(self, ids: Iterable[int], params: ServoParams = ServoParams(),
                 chunk_size: Optional[int] = None):
        self.servos: Dict[int, _MockServo] = {
            int(i): _MockServo(int(i), params) for i in ids
        }
        if len(self.servos) == 0:
            raise ConfigurationError("mock chain needs at least one servo")
        self._decoder = FrameDecoder()
        self._outbox = bytearray()
        self._muted: set = set()
        self._chunk_size = chunk_size
        self.frames_handled = 0

    # -- test hooks ------------------------------------------------------------

    def mute(self, servo_id: int) -> None:
        """Make one servo stop answering (simulates a dead bus segment)."""
        self._muted.add(servo_id)

    def unmute(self, servo_id: int) -> None:
        self._muted.discard(servo_id)

    def set_position(self, servo_id: int, radians: float) -> None:
        servo = self.servos[servo_id]
        servo.position = radians
        servo.write_reg("present_position", ticks_from_radians(radians))

    def get_position(self, servo_id: int) -> float:
        return self.servos[servo_id].position

    # -- virtual time ------------------------------------------------------------

    def advance(self, dt: float) -> None:
        for servo_id in sorted(self.servos):
            self.servos[servo_id].advance(dt)

    # -- transport interface -------------------------------------------------------

    def send(self, data: bytes) -> None:
        for frame in self._decoder.feed(data):
            self._handle(frame)

    def receive(self, timeout: float) -> bytes:
        if not self._outbox:
            return b""
        n = self._chunk_size or len(self._outbox)
        chunk = bytes(self._outbox[:n])
        del self._outbox[:n]
        return chunk

    # -- chain behavior --------------------------------------------------------------

    def _respond(self, servo_id: int, error: int = 0, payload: bytes = b"") -> None:
        if servo_id in self._muted:
            return
        self._outbox += packets.encode(packets.status(servo_id, error, payload))

    def _handle(self, frame: Frame) -> None:
        self.frames_handled += 1
        if frame.device_id == packets.BROADCAST_ID:
            targets = sorted(self.servos)
        elif frame.device_id in self.servos:
            targets = [frame.device_id]
        else:
            return  # nobody home at that id
        instr = frame.instruction
        if instr == packets.PING:
            for servo_id in targets:
                model = self.servos[servo_id].read_reg("model_number")
                fw = self.servos[servo_id].read_reg("firmware_version")
                self._respond(servo_id, 0, model.to_bytes(2, "little") + bytes([fw]))
        elif instr == packets.READ:
            address = int.from_bytes(frame.params[0:2], "little")
            size = int.from_bytes(frame.params[2:4], "little")
            for servo_id in targets:
                bank = self.servos[servo_id].bank
                self._respond(servo_id, 0, bytes(bank[address : address + size]))
        elif instr == packets.WRITE:
            address = int.from_bytes(frame.params[0:2], "little")
            data = frame.params[2:]
            for servo_id in targets:
                self._write_span(servo_id, address, data,
                                 respond=frame.device_id != packets.BROADCAST_ID)
        elif instr == packets.SYNC_READ:
            address, size, listed = packets.parse_sync_read_request(frame)
            for servo_id in listed:
                if servo_id in self.servos:
                    bank = self.servos[servo_id].bank
                    self._respond(servo_id, 0, bytes(bank[address : address + size]))
        elif instr == packets.SYNC_WRITE:
            address, _, values = packets.parse_sync_write_request(frame)
            for servo_id, data in values.items():
                if servo_id in self.servos:
                    self._write_span(servo_id, address, data, respond=False)
        else:
            for servo_id in targets:
                self._respond(servo_id, packets.ERR_INSTRUCTION)

    def _write_span(self, servo_id: int, address: int, data: bytes,
                    respond: bool) -> None:
        for reg_name in XM_TABLE.names():
            reg = XM_TABLE[reg_name]
            overlaps = address < reg.address + reg.size and reg.address < address + len(data)
            if overlaps and not reg.writable:
                if respond:
                    self._respond(servo_id, packets.ERR_ACCESS)
                return
        self.servos[servo_id].bank[address : address + len(data)] = data
        if respond:
            self._respond(servo_id, 0)
