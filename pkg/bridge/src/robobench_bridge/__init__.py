"""Reset/step bridge over the robobench task engine.

Exposes the 18 benchmark tasks through the flat environment loop most RL
code expects: ``make`` a handle, ``reset`` it for an observation, ``step``
it with an action array and get ``(observation, reward, done, info)`` back.
The engine remains the single simulation authority; this package holds no
state of its own beyond the handle bookkeeping, and every array crossing
the boundary is copied, never aliased.

Deliberately not here: wrappers, training utilities, vectorized pools.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from robobench.env import Env, make_env
from robobench.errors import ConfigurationError
from robobench.registry import task_info

__all__ = [
    "BridgeEnvHandle",
    "BridgeUsageError",
    "Space",
    "TaskLookupError",
    "close",
    "make",
    "reset",
    "step",
]


class TaskLookupError(LookupError):
    """Raised by make() for a task name the engine does not know."""


class BridgeUsageError(RuntimeError):
    """Raised for calls that break the reset/step protocol."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Space:
    """Box descriptor: shape plus per-component bounds (read-only arrays)."""

    shape: Tuple[int, ...]
    low: np.ndarray
    high: np.ndarray


class BridgeEnvHandle:
    """One task bound to one engine Env.

    Space descriptors are cached at construction. A handle is single-owner:
    do not share it across concurrent callers; make several handles instead.
    """

    def __init__(self, env: Env):
        self._env = env
        self._horizon = env.horizon
        self._dt = env.dt
        self._needs_reset = True
        self._done = False
        self._closed = False
        self.task_name = env.task.name
        self.action_space = Space(
            shape=(env.action_dim,),
            low=_frozen(env.action_low),
            high=_frozen(env.action_high),
        )
        self.observation_space = Space(
            shape=(env.observation_dim,),
            low=_frozen(np.full(env.observation_dim, -np.inf)),
            high=_frozen(np.full(env.observation_dim, np.inf)),
        )

    def _guard_open(self) -> None:
        if self._closed:
            raise BridgeUsageError("handle is closed")


def make(task_name: str, seed: int = 0, horizon: int = 100,
         dt: float = 0.1, backend: Any = None) -> BridgeEnvHandle:
    """Build a handle for one of the registered task names.

    The optional arguments pass straight through to the engine; by default
    the task runs on a fresh simulation backend.
    """
    try:
        task_info(task_name)
    except ConfigurationError as exc:
        raise TaskLookupError(str(exc)) from None
    env = make_env(task_name, backend=backend, seed=seed,
                   horizon=horizon, dt=dt)
    return BridgeEnvHandle(env)


def reset(handle: BridgeEnvHandle, seed: Optional[int] = None) -> np.ndarray:
    """Start an episode and return its first observation.

    With ``seed`` given, the episode stream is pinned: the handle plays the
    engine's episode 0 for that seed, so two resets with the same seed see
    identical episodes. Without it, the handle advances to the next episode
    of the current stream.
    """
    handle._guard_open()
    if seed is None:
        observation = handle._env.reset()
    else:
        if int(seed) != handle._env.seed:
            handle._env = Env(handle._env.task, handle._env.backend,
                              seed=int(seed), horizon=handle._horizon,
                              dt=handle._dt)
        observation = handle._env.reset(episode=0)
    handle._needs_reset = False
    handle._done = False
    return np.array(observation, dtype=float)


def step(handle: BridgeEnvHandle,
         action) -> Tuple[np.ndarray, float, bool, Dict[str, Any]]:
    """Advance one control step.

    Returns ``(observation, reward, done, info)`` with ``info`` carrying the
    sparse score, the done reason, and the step's safety-violation counts.
    Shape problems are rejected here, before anything reaches the engine;
    non-finite values are left to the engine's own policy-error handling.
    """
    handle._guard_open()
    if handle._needs_reset:
        raise BridgeUsageError("call reset before step")
    if handle._done:
        raise BridgeUsageError("episode is done; call reset to start another")
    action = np.array(action, dtype=float)  # boundary copy
    if action.shape != handle.action_space.shape:
        raise BridgeUsageError(
            f"action must have shape {handle.action_space.shape}, "
            f"got {action.shape}"
        )
    result = handle._env.step(action)
    handle._done = result.done
    info = {
        "score": float(result.score),
        "done_reason": result.done_reason,
        "safety": result.safety.as_dict(),
    }
    return (np.array(result.observation, dtype=float), float(result.reward),
            bool(result.done), info)


def close(handle: BridgeEnvHandle) -> None:
    """Release the handle's backend. Safe to call twice."""
    if handle._closed:
        return
    handle._env.close()
    handle._closed = True
