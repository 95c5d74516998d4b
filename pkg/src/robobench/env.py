"""Episode engine: reset/step lifecycle, seeding, termination, evaluation.

Seeding scheme: episode k of an environment built with seed s draws all of
its randomness from ``default_rng([s, k])``, so any single episode can be
reproduced without replaying its predecessors. On the simulation backend the
tuple (seed, config, policy) fully determines every logged byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .backend.base import ControlMode, RobotBackend
from .backend.sim import make_sim_backend
from .config import config_digest, to_jsonable
from .core import EpisodeSetup, RobotState, Task
from .errors import ConfigurationError, PolicyError, RobobenchError, UsageError
from .registry import make_task, task_info
from .safety import SafetyAccumulator, SafetyCounts, count_step
from .version import LOG_SCHEMA, VERSION


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    score: float
    done: bool
    done_reason: str  # "horizon" | "fell" | "none"
    safety: SafetyCounts


@dataclass
class EpisodeResult:
    """Everything an episode produced, ready for logging or aggregation."""

    steps: int
    total_reward: float
    final_score: float
    success: bool
    safety: SafetyAccumulator
    metrics: List[Dict[str, float]]
    records: List[Dict[str, Any]]
    meta: Dict[str, Any]
    policy_error: Optional[str] = None

    def footer(self) -> Dict[str, Any]:
        mean_reward = self.total_reward / self.steps if self.steps else 0.0
        return {
            "end": True,
            "steps": self.steps,
            "success": self.success,
            "total_reward": self.total_reward,
            "mean_reward": mean_reward,
            "final_score": self.final_score,
            "safety_totals": self.safety.totals(),
            "safety_per_step": self.safety.per_step(),
            "policy_error": self.policy_error,
        }


@dataclass
class SuccessReport:
    """Aggregate over evaluation episodes."""

    n_episodes: int
    success_fraction: float
    per_episode: List[bool]
    safety_totals: List[Dict[str, int]]
    safety_per_step: List[Dict[str, float]]
    mean_return: float
    mean_final_score: float
    errors: List[Optional[str]] = field(default_factory=list)


class Env:
    """One task bound to one backend. Single-owner; not thread-safe."""

    def __init__(self, task: Task, backend: RobotBackend, seed: int = 0,
                 horizon: int = 100, dt: float = 0.1,
                 extra_config: Optional[Dict[str, Any]] = None):
        if backend.robot != task.robot:
            raise ConfigurationError(
                f"task {task.name} needs a {task.robot} backend, "
                f"got {backend.robot}"
            )
        if horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        if dt <= 0:
            raise ConfigurationError("dt must be positive")
        self.task = task
        self.backend = backend
        self.seed = int(seed)
        self.horizon = int(horizon)
        self.dt = float(dt)
        self.task.dt = float(dt)
        self._limits = task.spec.safety
        self._t = 0
        self._episode_index: Optional[int] = None
        self._next_episode = 0
        self._done = True
        self._needs_reset = True
        self._last_action = np.zeros(task.action_dim)
        self._last_state: Optional[RobotState] = None
        self._setup: Optional[EpisodeSetup] = None
        base_config = {
            "task": task.name,
            "seed": self.seed,
            "dt": self.dt,
            "horizon": self.horizon,
            "backend": type(backend).__name__,
        }
        if extra_config:
            base_config.update(to_jsonable(extra_config))
        self.config: Dict[str, Any] = base_config
        self.config_digest = config_digest(base_config)

    # -- introspection ---------------------------------------------------------

    @property
    def action_dim(self) -> int:
        return self.task.action_dim

    @property
    def observation_dim(self) -> int:
        return self.task.observation_dim

    @property
    def action_low(self) -> np.ndarray:
        return self.task.spec.joint_lower.copy()

    @property
    def action_high(self) -> np.ndarray:
        return self.task.spec.joint_upper.copy()

    @property
    def t(self) -> int:
        return self._t

    @property
    def episode_index(self) -> Optional[int]:
        return self._episode_index

    def episode_meta(self) -> Dict[str, Any]:
        """Log-header metadata for the current episode."""
        if self._setup is None:
            raise UsageError("no episode in progress; call reset first")
        info = task_info(self.task.name)
        meta = {
            "schema": LOG_SCHEMA,
            "version": VERSION,
            "task": self.task.name,
            "family": info.family,
            "level": info.level,
            "robot": info.robot,
            "seed": self.seed,
            "episode_index": self._episode_index,
            "dt": self.dt,
            "horizon": self.horizon,
            "backend": type(self.backend).__name__,
            "config_digest": self.config_digest,
            "goal": to_jsonable(self._setup.goal_meta),
            "dynamics": to_jsonable(self._setup.dynamics),
            "limits": {
                "lower": to_jsonable(self._limits.lower),
                "upper": to_jsonable(self._limits.upper),
                "velocity_max": to_jsonable(self._limits.velocity_max),
                "current_max": to_jsonable(self._limits.current_max),
                "margin": self._limits.margin,
            },
        }
        return meta

    # -- lifecycle ---------------------------------------------------------------

    def reset(self, episode: Optional[int] = None) -> np.ndarray:
        if episode is None:
            episode = self._next_episode
        if episode < 0:
            raise UsageError("episode index must be non-negative")
        self._episode_index = int(episode)
        self._next_episode = int(episode) + 1
        rng = np.random.default_rng([self.seed, int(episode)])
        self._setup = self.task.sample_episode(rng)
        self.backend.reset(self._setup)
        state = self.backend.read_state()
        self._t = 0
        self._done = False
        self._needs_reset = False
        self._last_action = np.zeros(self.task.action_dim)
        self._last_state = state
        return self.task.observe(state, self._last_action, 0)

    def step(self, action: np.ndarray) -> StepResult:
        if self._needs_reset or self._done:
            raise UsageError("episode is finished; call reset before step")
        action = np.asarray(action, dtype=float)
        if action.shape != (self.task.action_dim,):
            raise UsageError(
                f"action must have shape ({self.task.action_dim},), "
                f"got {action.shape}"
            )
        if not np.all(np.isfinite(action)):
            raise PolicyError("action contains non-finite values")
        clamped = self.task.spec.clamp(action)
        self.backend.write_command(ControlMode.POSITION, clamped)
        self.backend.step(self.dt)
        state = self.backend.read_state()
        self._t += 1
        self._last_action = clamped
        safety = count_step(self._limits, state.qpos, state.qvel, state.current)
        reward = float(self.task.reward(state, self._t))
        score = float(self.task.score(state, self._t))
        fell = self.task.is_fallen(state)
        done_reason = "none"
        if fell:
            done_reason = "fell"
        elif self._t >= self.horizon:
            done_reason = "horizon"
        done = done_reason != "none"
        self._done = done
        observation = self.task.observe(state, self._last_action, self._t)
        self._last_state = state
        return StepResult(
            observation=observation,
            reward=reward,
            score=score,
            done=done,
            done_reason=done_reason,
            safety=safety,
        )

    @property
    def last_action(self) -> np.ndarray:
        return self._last_action.copy()

    def last_state(self) -> RobotState:
        if self._last_state is None:
            raise UsageError("no step has run yet")
        return self._last_state

    def close(self) -> None:
        self.backend.close()


def make_env(
    name: str,
    backend: Optional[RobotBackend] = None,
    seed: int = 0,
    horizon: int = 100,
    dt: float = 0.1,
    extra_config: Optional[Dict[str, Any]] = None,
) -> Env:
    """Build an environment for one of the 18 registered tasks.

    With no backend given, a fresh simulation backend of the right robot type
    is constructed.
    """
    info = task_info(name)
    task = make_task(name, dt=dt)
    if backend is None:
        backend = make_sim_backend(info.robot)
    return Env(task, backend, seed=seed, horizon=horizon, dt=dt,
               extra_config=extra_config)


Policy = Callable[[np.ndarray], np.ndarray]


def _call_policy(policy: Any, observation: np.ndarray) -> np.ndarray:
    act = getattr(policy, "act", None)
    if act is not None:
        return np.asarray(act(observation), dtype=float)
    return np.asarray(policy(observation), dtype=float)


def run_episode(
    env: Env,
    policy: Any,
    episode: Optional[int] = None,
    collect_records: bool = True,
) -> EpisodeResult:
    """Run one full episode; aborts cleanly (and flags) on a bad policy action.

    Record layout per step (all lists are plain floats, ready for JSON):
    t, action, qpos, qvel, current, reward, score, done, done_reason,
    violations, metrics, plus object fields on claw object tasks and torso
    fields on quadruped tasks.
    """
    observation = env.reset(episode)
    meta = env.episode_meta()
    safety = SafetyAccumulator()
    metrics: List[Dict[str, float]] = []
    records: List[Dict[str, Any]] = []
    total_reward = 0.0
    final_score = 0.0
    policy_error: Optional[str] = None
    while True:
        try:
            action = _call_policy(policy, observation)
            if action.shape != (env.action_dim,):
                raise PolicyError(
                    f"policy returned shape {action.shape}, "
                    f"expected ({env.action_dim},)"
                )
            if not np.all(np.isfinite(action)):
                raise PolicyError("policy returned non-finite action values")
        except PolicyError as exc:
            policy_error = str(exc)
            break
        except Exception as exc:  # policy code crashed; abort, don't unwind
            policy_error = f"{type(exc).__name__}: {exc}"
            break
        result = env.step(action)
        state = env.last_state()
        total_reward += result.reward
        final_score = result.score
        safety.add(result.safety)
        step_metrics = env.task.metrics(state, env.t)
        metrics.append(step_metrics)
        if collect_records:
            record: Dict[str, Any] = {
                "t": env.t,
                "action": to_jsonable(env.last_action),
                "qpos": to_jsonable(state.qpos),
                "qvel": to_jsonable(state.qvel),
                "current": to_jsonable(state.current),
                "reward": result.reward,
                "score": result.score,
                "done": result.done,
                "done_reason": result.done_reason,
                "violations": result.safety.as_dict(),
                "metrics": to_jsonable(step_metrics),
            }
            if env.task.robot == "dclaw" and env.task.family != "DClawPose":
                record["object_angle"] = state.object_angle
                record["object_velocity"] = state.object_velocity
            if env.task.robot == "dkitty":
                record["base_position"] = to_jsonable(state.base_position)
                record["base_rotation"] = to_jsonable(state.base_rotation)
                record["base_linear_velocity"] = to_jsonable(
                    state.base_linear_velocity)
                record["base_angular_velocity"] = to_jsonable(
                    state.base_angular_velocity)
            records.append(record)
        observation = result.observation
        if result.done:
            break
    success = False if policy_error else env.task.success(metrics)
    return EpisodeResult(
        steps=env.t,
        total_reward=total_reward,
        final_score=final_score,
        success=success,
        safety=safety,
        metrics=metrics,
        records=records,
        meta=meta,
        policy_error=policy_error,
    )


def evaluate(
    env: Env,
    policy: Any,
    n_episodes: int = 10,
    start_episode: int = 0,
    collect_records: bool = False,
    on_episode: Optional[Callable[[int, EpisodeResult], None]] = None,
) -> SuccessReport:
    """Seeded evaluation: episodes start_episode .. start_episode+n-1.

    Episode failures (transport, policy) count as unsuccessful and are
    flagged rather than raised, so a flaky bus cannot inflate success.
    """
    if n_episodes < 1:
        raise ConfigurationError("n_episodes must be at least 1")
    bits: List[bool] = []
    totals: List[Dict[str, int]] = []
    per_step: List[Dict[str, float]] = []
    errors: List[Optional[str]] = []
    returns: List[float] = []
    scores: List[float] = []
    for k in range(start_episode, start_episode + n_episodes):
        try:
            result = run_episode(env, policy, episode=k,
                                 collect_records=collect_records)
        except RobobenchError as exc:
            bits.append(False)
            totals.append({"position": 0, "velocity": 0, "current": 0})
            per_step.append({"position": 0.0, "velocity": 0.0, "current": 0.0})
            errors.append(f"{type(exc).__name__}: {exc}")
            continue
        bits.append(result.success)
        totals.append(result.safety.totals())
        per_step.append(result.safety.per_step())
        errors.append(result.policy_error)
        returns.append(result.total_reward)
        scores.append(result.final_score)
        if on_episode is not None:
            on_episode(k, result)
    return SuccessReport(
        n_episodes=n_episodes,
        success_fraction=float(np.mean([1.0 if b else 0.0 for b in bits])),
        per_episode=bits,
        safety_totals=totals,
        safety_per_step=per_step,
        mean_return=float(np.mean(returns)) if returns else math.nan,
        mean_final_score=float(np.mean(scores)) if scores else math.nan,
        errors=errors,
    )
