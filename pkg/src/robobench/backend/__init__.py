"""Robot backends: deterministic simulation and the servo-bus driver."""

from .base import ControlMode, RobotBackend
from .hardware import BusServoBackend, ServoBus
from .sim import SimBackend, make_sim_backend
from .transport import MockServoTransport, SerialTransport, Transport

__all__ = [
    "BusServoBackend",
    "ControlMode",
    "MockServoTransport",
    "RobotBackend",
    "SerialTransport",
    "ServoBus",
    "SimBackend",
    "Transport",
    "make_sim_backend",
]
