"""CRC-16 used by the servo bus framing.

Polynomial 0x8005, initial value 0, no input/output reflection, no final
xor. The empty string therefore checksums to 0x0000. The 256-entry table is
derived from the polynomial at import time rather than shipped as literals.
"""

from __future__ import annotations

POLY = 0x8005


def _build_table(poly: int) -> tuple:
    table = []
    for byte in range(256):
        acc = byte << 8
        for _ in range(8):
            if acc & 0x8000:
                acc = ((acc << 1) ^ poly) & 0xFFFF
            else:
                acc = (acc << 1) & 0xFFFF
        table.append(acc)
    return tuple(table)


TABLE = _build_table(POLY)


def crc16(data: bytes, crc: int = 0) -> int:
    """Checksum ``data``, optionally continuing from a previous value."""
    for byte in data:
        crc = ((crc << 8) ^ TABLE[((crc >> 8) ^ byte) & 0xFF]) & 0xFFFF
    return crc
