"""Byte-exact framing, checksums, and register maps for the servo bus."""

from .crc import crc16
from .packets import (
    BROADCAST_ID,
    Frame,
    FrameDecoder,
    HEADER,
    PING,
    READ,
    STATUS,
    SYNC_READ,
    SYNC_WRITE,
    WRITE,
    decode,
    encode,
    parse_status,
    parse_sync_read_request,
    parse_sync_write_request,
    ping,
    read_request,
    status,
    stuff,
    sync_read_request,
    sync_write_request,
    unstuff,
    write_request,
)
from .control_table import (
    ControlTable,
    GOAL_REGISTER_FOR_MODE,
    Register,
    XM_TABLE,
    radians_from_ticks,
    ticks_from_radians,
)

__all__ = [
    "BROADCAST_ID",
    "ControlTable",
    "Frame",
    "FrameDecoder",
    "GOAL_REGISTER_FOR_MODE",
    "HEADER",
    "PING",
    "READ",
    "Register",
    "STATUS",
    "SYNC_READ",
    "SYNC_WRITE",
    "WRITE",
    "XM_TABLE",
    "crc16",
    "decode",
    "encode",
    "parse_status",
    "parse_sync_read_request",
    "parse_sync_write_request",
    "ping",
    "radians_from_ticks",
    "read_request",
    "status",
    "stuff",
    "sync_read_request",
    "sync_write_request",
    "ticks_from_radians",
    "unstuff",
    "write_request",
]
