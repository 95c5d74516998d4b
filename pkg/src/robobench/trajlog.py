"""JSONL episode logs.

One file per episode: a header line with the episode metadata, one line per
step, and a footer line with the episode summary. Every line is canonical
JSON, so a repeated run with the same seed and config writes identical bytes.
Files appear atomically (temp file in the same directory, then rename); a
crash mid-write never leaves a half-log behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List

from .config import canonical_json
from .errors import ConfigurationError
from .version import LOG_SCHEMA


@dataclass
class EpisodeLog:
    """A parsed episode log file."""

    meta: Dict[str, Any]
    records: List[Dict[str, Any]]
    footer: Dict[str, Any]

    @property
    def task(self) -> str:
        return self.meta["task"]

    @property
    def success(self) -> bool:
        return bool(self.footer["success"])


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write a file so it appears complete or not at all."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        # the temp file may already be gone if os.replace succeeded
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("ascii"))


def write_episode_log(path: str, meta: Dict[str, Any],
                      records: Iterable[Dict[str, Any]],
                      footer: Dict[str, Any]) -> None:
    """Write header + step records + footer as one JSONL file, atomically."""
    if meta.get("schema") != LOG_SCHEMA:
        raise ConfigurationError(
            f"episode meta must carry schema {LOG_SCHEMA!r}")

    def lines() -> Iterator[str]:
        yield canonical_json(meta)
        for record in records:
            yield canonical_json(record)
        yield canonical_json(footer)

    atomic_write_text(path, "\n".join(lines()) + "\n")


def read_episode_log(path: str) -> EpisodeLog:
    """Parse one episode log, validating schema and line structure."""
    with open(path, "r", encoding="ascii") as handle:
        raw = [line for line in (s.strip() for s in handle) if line]
    if len(raw) < 2:
        raise ConfigurationError(f"{path}: not an episode log (too short)")
    try:
        parsed = [json.loads(line) for line in raw]
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON line: {exc}") from None
    meta, body, footer = parsed[0], parsed[1:-1], parsed[-1]
    if meta.get("schema") != LOG_SCHEMA:
        raise ConfigurationError(
            f"{path}: unsupported log schema {meta.get('schema')!r}")
    if not footer.get("end"):
        raise ConfigurationError(f"{path}: missing footer line (truncated?)")
    return EpisodeLog(meta=meta, records=body, footer=footer)


def episode_log_paths(directory: str) -> List[str]:
    """All .jsonl files under a directory, sorted for stable aggregation."""
    if not os.path.isdir(directory):
        raise ConfigurationError(f"log directory not found: {directory}")
    found: List[str] = []
    for root, _dirs, files in os.walk(directory):
        for name in files:
            if name.endswith(".jsonl") and not name.startswith("."):
                found.append(os.path.join(root, name))
    return sorted(found)


def read_episode_logs(directory: str) -> List[EpisodeLog]:
    return [read_episode_log(p) for p in episode_log_paths(directory)]
