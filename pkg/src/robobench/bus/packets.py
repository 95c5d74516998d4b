"""Byte-level framing for the smart-servo bus.

Wire format, little-endian throughout:

    FF FF FD 00 | id | len_lo len_hi | instruction | params... | crc_lo crc_hi

``len`` counts everything after the length field itself: instruction byte,
stuffed parameter bytes, and the two CRC bytes. The CRC covers the frame from
the first header byte through the last parameter byte.

Any FF FF FD run inside the parameter bytes would read as a new header, so an
extra FD is stuffed after each such run before framing and stripped on decode.
The length field counts the stuffed bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..errors import ChecksumError, FramingError, UsageError
from .crc import crc16

HEADER = b"\xff\xff\xfd\x00"

# Instruction bytes.
PING = 0x01
READ = 0x02
WRITE = 0x03
REG_WRITE = 0x04
ACTION = 0x05
FACTORY_RESET = 0x06
REBOOT = 0x08
STATUS = 0x55
SYNC_READ = 0x82
SYNC_WRITE = 0x83

BROADCAST_ID = 0xFE
MAX_ID = 0xFC

# Bits of the error byte in a status frame.
ERR_RESULT_FAIL = 0x01
ERR_INSTRUCTION = 0x02
ERR_CRC = 0x03
ERR_DATA_RANGE = 0x04
ERR_DATA_LENGTH = 0x05
ERR_DATA_LIMIT = 0x06
ERR_ACCESS = 0x07
ERR_ALERT = 0x80

_MAX_LEN = 0xFFFF


def stuff(params: bytes) -> bytes:
    """Insert 0xFD after every FF FF FD run so no header appears in the body."""
    out = bytearray()
    run = 0
    for b in params:
        out.append(b)
        if run >= 2 and b == 0xFD:
            out.append(0xFD)
            run = 0
        elif b == 0xFF:
            run += 1
        else:
            run = 0
    return bytes(out)


def unstuff(params: bytes) -> bytes:
    """Inverse of :func:`stuff`. Raises if a header run lacks its pad byte."""
    out = bytearray()
    run = 0
    i = 0
    n = len(params)
    while i < n:
        b = params[i]
        out.append(b)
        if run >= 2 and b == 0xFD:
            i += 1
            if i >= n or params[i] != 0xFD:
                raise FramingError("unescaped header sequence in parameters")
            run = 0
        elif b == 0xFF:
            run += 1
        else:
            run = 0
        i += 1
    return bytes(out)


@dataclass(frozen=True)
class Frame:
    """One decoded bus frame (parameters already unstuffed)."""

    device_id: int
    instruction: int
    params: bytes = b""

    def __post_init__(self):
        if not 0 <= self.device_id <= 0xFE:
            raise UsageError(f"device id {self.device_id} out of range 0..254")
        if not 0 <= self.instruction <= 0xFF:
            raise UsageError(f"instruction {self.instruction:#x} out of range")


def encode(frame: Frame) -> bytes:
    """Serialize a frame, stuffing parameters and appending the CRC."""
    body = stuff(bytes(frame.params))
    length = 1 + len(body) + 2
    if length > _MAX_LEN:
        raise UsageError("parameters too long for a single frame")
    head = bytearray(HEADER)
    head.append(frame.device_id)
    head += length.to_bytes(2, "little")
    head.append(frame.instruction)
    head += body
    crc = crc16(bytes(head))
    head += crc.to_bytes(2, "little")
    return bytes(head)


def decode(raw: bytes) -> Frame:
    """Parse one complete frame. Raises on bad header, length, or CRC."""
    if len(raw) < 10:
        raise FramingError(f"frame too short ({len(raw)} bytes)")
    if raw[:4] != HEADER:
        raise FramingError("bad header")
    length = int.from_bytes(raw[5:7], "little")
    if length < 3:
        raise FramingError(f"length field {length} below minimum 3")
    total = 7 + length
    if len(raw) != total:
        raise FramingError(f"expected {total} bytes, got {len(raw)}")
    sent = int.from_bytes(raw[-2:], "little")
    calc = crc16(raw[:-2])
    if sent != calc:
        raise ChecksumError(f"crc mismatch: frame {sent:#06x}, computed {calc:#06x}")
    params = unstuff(raw[8:-2])
    return Frame(device_id=raw[4], instruction=raw[7], params=params)


class FrameDecoder:
    """Incremental decoder over a byte stream.

    Feed arbitrary chunks; complete frames come back in order. Garbage between
    frames is skipped by scanning for the next header; a frame with a bad CRC
    is dropped (counted in ``errors``) and scanning resumes one byte past the
    failed header so interleaved valid traffic is not lost.
    """

    def __init__(self):
        self._buf = bytearray()
        self.errors = 0

    def feed(self, chunk: bytes) -> List[Frame]:
        self._buf += chunk
        frames: List[Frame] = []
        while True:
            start = self._buf.find(HEADER)
            if start < 0:
                # Keep a possible header prefix at the tail.
                keep = min(len(self._buf), 3)
                del self._buf[: len(self._buf) - keep]
                break
            if start > 0:
                del self._buf[:start]
            if len(self._buf) < 7:
                break
            length = int.from_bytes(self._buf[5:7], "little")
            if length < 3:
                self.errors += 1
                del self._buf[:1]
                continue
            total = 7 + length
            if len(self._buf) < total:
                break
            raw = bytes(self._buf[:total])
            try:
                frames.append(decode(raw))
            except FramingError:
                self.errors += 1
                del self._buf[:1]
                continue
            del self._buf[:total]
        return frames

    @property
    def pending(self) -> int:
        return len(self._buf)


# -- request/response helpers -------------------------------------------------


def ping(device_id: int) -> Frame:
    return Frame(device_id, PING)


def read_request(device_id: int, address: int, size: int) -> Frame:
    params = address.to_bytes(2, "little") + size.to_bytes(2, "little")
    return Frame(device_id, READ, params)


def write_request(device_id: int, address: int, data: bytes) -> Frame:
    return Frame(device_id, WRITE, address.to_bytes(2, "little") + bytes(data))


def status(device_id: int, error: int = 0, params: bytes = b"") -> Frame:
    if not 0 <= error <= 0xFF:
        raise UsageError(f"error byte {error:#x} out of range")
    return Frame(device_id, STATUS, bytes([error]) + bytes(params))


def parse_status(frame: Frame) -> Tuple[int, bytes]:
    """Split a status frame into (error byte, payload)."""
    if frame.instruction != STATUS:
        raise FramingError(
            f"expected status instruction {STATUS:#04x}, got {frame.instruction:#04x}"
        )
    if len(frame.params) < 1:
        raise FramingError("status frame missing error byte")
    return frame.params[0], frame.params[1:]


def sync_read_request(device_ids: Sequence[int], address: int, size: int) -> Frame:
    ids = list(device_ids)
    if len(set(ids)) != len(ids):
        raise UsageError("duplicate device id in sync read")
    params = address.to_bytes(2, "little") + size.to_bytes(2, "little") + bytes(ids)
    return Frame(BROADCAST_ID, SYNC_READ, params)


def parse_sync_read_request(frame: Frame) -> Tuple[int, int, List[int]]:
    if frame.instruction != SYNC_READ:
        raise FramingError("not a sync read frame")
    if len(frame.params) < 4:
        raise FramingError("sync read frame too short")
    address = int.from_bytes(frame.params[0:2], "little")
    size = int.from_bytes(frame.params[2:4], "little")
    return address, size, list(frame.params[4:])


def sync_write_request(
    address: int, size: int, values: Dict[int, bytes]
) -> Frame:
    """One broadcast frame writing ``size`` bytes at ``address`` on each device."""
    params = bytearray(address.to_bytes(2, "little"))
    params += size.to_bytes(2, "little")
    for device_id, data in values.items():
        if len(data) != size:
            raise UsageError(
                f"device {device_id}: expected {size} data bytes, got {len(data)}"
            )
        if not 0 <= device_id <= MAX_ID:
            raise UsageError(f"device id {device_id} out of range 0..252")
        params.append(device_id)
        params += bytes(data)
    return Frame(BROADCAST_ID, SYNC_WRITE, bytes(params))


def parse_sync_write_request(frame: Frame) -> Tuple[int, int, Dict[int, bytes]]:
    if frame.instruction != SYNC_WRITE:
        raise FramingError("not a sync write frame")
    if len(frame.params) < 4:
        raise FramingError("sync write frame too short")
    address = int.from_bytes(frame.params[0:2], "little")
    size = int.from_bytes(frame.params[2:4], "little")
    body = frame.params[4:]
    stride = 1 + size
    if stride == 1 or len(body) % stride:
        raise FramingError("sync write payload does not tile into id+data blocks")
    values: Dict[int, bytes] = {}
    for i in range(0, len(body), stride):
        device_id = body[i]
        if device_id in values:
            raise FramingError(f"device id {device_id} repeated in sync write")
        values[device_id] = bytes(body[i + 1 : i + stride])
    return address, size, values
