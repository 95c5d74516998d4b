"""Register map and unit conversions for the smart servos on the bus.

The table is plain data so alternative servo models can ship their own map
without code changes. Addresses, sizes, and unit scales below match the
12-bit, 4096-tick actuators used on both robots:

    4096 ticks per revolution, tick 2048 = 0 rad
    velocity in units of 0.229 rpm, signed
    current in units of 2.69 mA, signed
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

from ..errors import ConfigurationError, UsageError

TICKS_PER_REV = 4096
TICK_CENTER = 2048
RADIANS_PER_TICK = 2.0 * math.pi / TICKS_PER_REV
VELOCITY_UNIT_RAD_S = 0.229 * 2.0 * math.pi / 60.0  # raw -> rad/s
CURRENT_UNIT_A = 2.69e-3  # raw -> amperes

# Operating-mode register values.
MODE_CURRENT = 0
MODE_VELOCITY = 1
MODE_POSITION = 3
MODE_EXTENDED_POSITION = 4
MODE_CURRENT_POSITION = 5
MODE_PWM = 16


@dataclass(frozen=True)
class Register:
    """One control-table entry."""

    name: str
    address: int
    size: int  # bytes: 1, 2, or 4
    signed: bool = False
    writable: bool = False
    default: int = 0


class ControlTable:
    """Validated register map with raw encode/decode helpers."""

    def __init__(self, registers: Iterable[Register]):
        self._by_name: Dict[str, Register] = {}
        occupied: Dict[int, str] = {}
        for reg in registers:
            if reg.size not in (1, 2, 4):
                raise ConfigurationError(f"{reg.name}: register size {reg.size}")
            if reg.address < 0:
                raise ConfigurationError(f"{reg.name}: negative address")
            if reg.name in self._by_name:
                raise ConfigurationError(f"duplicate register name {reg.name!r}")
            for offset in range(reg.size):
                addr = reg.address + offset
                if addr in occupied:
                    raise ConfigurationError(
                        f"{reg.name} overlaps {occupied[addr]} at address {addr}"
                    )
                occupied[addr] = reg.name
            self._by_name[reg.name] = reg

    def __getitem__(self, name: str) -> Register:
        try:
            return self._by_name[name]
        except KeyError:
            raise ConfigurationError(f"unknown register {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> Tuple[str, ...]:
        return tuple(self._by_name)

    def at(self, address: int, size: int) -> Optional[Register]:
        """Register exactly spanning [address, address+size), if any."""
        for reg in self._by_name.values():
            if reg.address == address and reg.size == size:
                return reg
        return None

    def encode(self, name: str, value: int) -> bytes:
        reg = self[name]
        value = int(value)
        bits = reg.size * 8
        if reg.signed:
            lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
        else:
            lo, hi = 0, (1 << bits) - 1
        if not lo <= value <= hi:
            raise UsageError(f"{name}: value {value} outside {lo}..{hi}")
        return value.to_bytes(reg.size, "little", signed=reg.signed)

    def decode(self, name: str, data: bytes) -> int:
        reg = self[name]
        if len(data) != reg.size:
            raise UsageError(f"{name}: expected {reg.size} bytes, got {len(data)}")
        return int.from_bytes(data, "little", signed=reg.signed)


XM_REGISTERS = (
    Register("model_number", 0, 2),
    Register("firmware_version", 6, 1),
    Register("bus_id", 7, 1, writable=True, default=1),
    Register("baud_rate", 8, 1, writable=True, default=1),
    Register("operating_mode", 11, 1, writable=True, default=MODE_POSITION),
    Register("homing_offset", 20, 4, signed=True, writable=True),
    Register("temperature_limit", 31, 1, writable=True, default=80),
    Register("max_voltage_limit", 32, 2, writable=True, default=160),
    Register("pwm_limit", 36, 2, writable=True, default=885),
    Register("current_limit", 38, 2, writable=True, default=1193),
    Register("velocity_limit", 44, 4, writable=True, default=1023),
    Register("max_position_limit", 48, 4, writable=True, default=4095),
    Register("min_position_limit", 52, 4, writable=True, default=0),
    Register("torque_enable", 64, 1, writable=True),
    Register("led", 65, 1, writable=True),
    Register("hardware_error_status", 70, 1),
    Register("goal_pwm", 100, 2, signed=True, writable=True),
    Register("goal_current", 102, 2, signed=True, writable=True),
    Register("goal_velocity", 104, 4, signed=True, writable=True),
    Register("profile_acceleration", 108, 4, writable=True),
    Register("profile_velocity", 112, 4, writable=True),
    Register("goal_position", 116, 4, signed=True, writable=True, default=TICK_CENTER),
    Register("realtime_tick", 120, 2),
    Register("moving", 122, 1),
    Register("present_pwm", 124, 2, signed=True),
    Register("present_current", 126, 2, signed=True),
    Register("present_velocity", 128, 4, signed=True),
    Register("present_position", 132, 4, signed=True, default=TICK_CENTER),
    Register("velocity_trajectory", 136, 4, signed=True),
    Register("position_trajectory", 140, 4, signed=True),
    Register("present_input_voltage", 144, 2, default=120),
    Register("present_temperature", 146, 1, default=25),
)

XM_TABLE = ControlTable(XM_REGISTERS)

# Which goal register each operating mode drives.
GOAL_REGISTER_FOR_MODE = {
    MODE_CURRENT: "goal_current",
    MODE_VELOCITY: "goal_velocity",
    MODE_POSITION: "goal_position",
    MODE_EXTENDED_POSITION: "goal_position",
    MODE_CURRENT_POSITION: "goal_position",
    MODE_PWM: "goal_pwm",
}


def radians_from_ticks(ticks: int) -> float:
    return (int(ticks) - TICK_CENTER) * RADIANS_PER_TICK


def ticks_from_radians(radians: float) -> int:
    return int(round(radians / RADIANS_PER_TICK)) + TICK_CENTER


def rad_s_from_velocity_raw(raw: int) -> float:
    return int(raw) * VELOCITY_UNIT_RAD_S


def velocity_raw_from_rad_s(rad_s: float) -> int:
    return int(round(rad_s / VELOCITY_UNIT_RAD_S))


def amps_from_current_raw(raw: int) -> float:
    return int(raw) * CURRENT_UNIT_A


def current_raw_from_amps(amps: float) -> int:
    return int(round(amps / CURRENT_UNIT_A))
