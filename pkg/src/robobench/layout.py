"""Named-slice descriptors for flat observation vectors.

Every task emits a fixed-length 1D observation. A ``Layout`` records which
index range each component occupies so logs, tests, and downstream tooling
can address components by name instead of magic offsets.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Field:
    name: str
    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start


class Layout:
    """Ordered (name, length) fields tiling ``[0, total)`` with no gaps."""

    def __init__(self, fields):
        offset = 0
        built = []
        seen = set()
        for name, length in fields:
            if length <= 0:
                raise ValueError(f"field {name!r} has non-positive length {length}")
            if name in seen:
                raise ValueError(f"duplicate field name {name!r}")
            seen.add(name)
            built.append(Field(name, offset, offset + length))
            offset += length
        self.fields = tuple(built)
        self.total = offset

    def slice_of(self, name: str) -> slice:
        for f in self.fields:
            if f.name == name:
                return slice(f.start, f.stop)
        raise KeyError(name)

    @property
    def names(self):
        return tuple(f.name for f in self.fields)

    def __len__(self) -> int:
        return self.total

    def tiles_completely(self) -> bool:
        """True when fields cover [0, total) contiguously in order."""
        cursor = 0
        for f in self.fields:
            if f.start != cursor or f.stop <= f.start:
                return False
            cursor = f.stop
        return cursor == self.total

    def __repr__(self):
        inner = ", ".join(f"{f.name}[{f.start}:{f.stop}]" for f in self.fields)
        return f"Layout({inner})"
