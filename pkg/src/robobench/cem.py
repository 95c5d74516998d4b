"""Cross-entropy method over flat policy parameters.

Diagonal Gaussian search distribution. Each iteration samples a population,
scores it, refits mean/std to the top elite fraction, and floors the std so
the search never collapses to a point. Previous elites stay in the selection
pool (the running elite mean is therefore non-decreasing on deterministic
scoring), and the freshly refit mean is itself scored as a candidate, since
averaging elites routinely beats every raw sample.

Scoring is deterministic per candidate: every rollout uses fixed episode
indices, so two candidates are always compared on identical initial states.

``cem_optimize`` searches in a preconditioned parameter space. Weight columns
are scaled by how persistent their observation features are: joint angles and
last-action columns shape the steady state, so their noise must stay small,
while goal-feature columns (tracking errors and the like) can take large
steps because their influence fades as the policy improves and the feature
itself shrinks. Velocity columns get the least noise of all; feedback on a
signal that can swing several radians per second destabilizes rollouts
faster than anything else. The search starts at the hold-position policy
(identity on the joint-angle block) rather than the zero policy: commanding
the current pose is neutral for a position-controlled robot and sits inside
the stable region, where selection pressure on the goal columns is clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .env import Env, run_episode
from .errors import ConfigurationError
from .policies import LinearPolicy


@dataclass(frozen=True)
class CemConfig:
    population: int = 64
    elite_frac: float = 0.125
    iterations: int = 50
    sigma: float = 0.03
    std_floor: float = 0.02
    episodes_per_candidate: int = 3
    train_horizon: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ConfigurationError("population must be at least 4")
        if not 0.0 < self.elite_frac < 1.0:
            raise ConfigurationError("elite_frac must be in (0, 1)")
        if self.n_elite < 1:
            raise ConfigurationError(
                "population * elite_frac must select at least one candidate")
        if self.iterations < 1:
            raise ConfigurationError("iterations must be at least 1")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be positive")
        if self.std_floor <= 0:
            raise ConfigurationError("std_floor must be positive")
        if self.episodes_per_candidate < 1:
            raise ConfigurationError("episodes_per_candidate must be >= 1")
        if self.train_horizon < 1:
            raise ConfigurationError("train_horizon must be at least 1")

    @property
    def n_elite(self) -> int:
        return int(round(self.population * self.elite_frac))


@dataclass
class CemResult:
    """Search outcome. Parameters are in search coordinates; for
    ``cem_optimize`` multiply by ``parameter_scale`` to get policy weights."""

    best_params: np.ndarray
    best_score: float
    mean: np.ndarray
    std: np.ndarray
    parameter_scale: Optional[np.ndarray] = None
    curve: List[Dict[str, float]] = field(default_factory=list)
    evaluations: int = 0
    flagged: int = 0  # candidates whose score came back non-finite
    stopped_early: bool = False


ScoreFn = Callable[[np.ndarray], float]
IterationCallback = Callable[[int, CemResult], bool]


def cem_search(score_fn: ScoreFn, dim: int, config: CemConfig,
               init_mean: Optional[np.ndarray] = None,
               on_iteration: Optional[IterationCallback] = None,
               parameter_scale: Optional[np.ndarray] = None) -> CemResult:
    """Maximize ``score_fn`` over R^dim.

    ``on_iteration`` (if given) sees the running result after each iteration
    and may return True to stop early, e.g. once a success target is hit.
    ``parameter_scale`` is carried through to the result untouched so
    callbacks can map search coordinates back to model coordinates.
    """
    if dim < 1:
        raise ConfigurationError("dim must be at least 1")
    rng = np.random.default_rng(config.seed)
    mean = np.zeros(dim) if init_mean is None else \
        np.asarray(init_mean, dtype=float).copy()
    if mean.shape != (dim,):
        raise ConfigurationError(f"init_mean must have shape ({dim},)")
    std = np.full(dim, config.sigma)

    result = CemResult(best_params=mean.copy(), best_score=-np.inf,
                       mean=mean, std=std, parameter_scale=parameter_scale)

    def scored(params: np.ndarray) -> float:
        value = float(score_fn(params))
        result.evaluations += 1
        if not np.isfinite(value):
            result.flagged += 1
            return -np.inf
        return value

    # the start point is the first candidate: the search never returns
    # something worse than what it was given
    result.best_score = scored(mean)

    # elites of the previous iteration compete with each new batch
    held_params: List[np.ndarray] = [mean.copy()]
    held_scores: List[float] = [result.best_score]

    for iteration in range(config.iterations):
        samples = rng.normal(mean, std, size=(config.population, dim))
        scores = np.array([scored(s) for s in samples])

        pool_params = list(samples) + held_params
        pool_scores = np.concatenate([scores, np.asarray(held_scores)])
        order = np.argsort(pool_scores)[::-1]
        elite_idx = order[: config.n_elite]
        elites = np.stack([pool_params[i] for i in elite_idx])
        elite_scores = pool_scores[elite_idx]

        mean = elites.mean(axis=0)
        std = np.maximum(elites.std(axis=0), config.std_floor)
        held_params = [p.copy() for p in elites]
        held_scores = [float(s) for s in elite_scores]

        if elite_scores[0] > result.best_score:
            result.best_score = float(elite_scores[0])
            result.best_params = pool_params[elite_idx[0]].copy()
        mean_score = scored(mean)
        if mean_score > result.best_score:
            result.best_score = mean_score
            result.best_params = mean.copy()
        result.mean = mean
        result.std = std
        finite = pool_scores[np.isfinite(pool_scores)]
        result.curve.append({
            "iteration": iteration,
            "best_score": result.best_score,
            "elite_mean": float(np.mean(elite_scores)),
            "mean_score": mean_score,
            "population_mean": float(np.mean(finite)) if finite.size else
            float("-inf"),
            "std_mean": float(np.mean(std)),
        })
        if on_iteration is not None and on_iteration(iteration, result):
            result.stopped_early = True
            break
    return result


def rollout_score(env: Env, policy: Any, episodes: int) -> float:
    """Mean episode return over fixed episode indices 0..episodes-1."""
    returns = []
    for k in range(episodes):
        outcome = run_episode(env, policy, episode=k, collect_records=False)
        if outcome.policy_error is not None:
            return float("-inf")
        returns.append(outcome.total_reward)
    return float(np.mean(returns))


# Sampling-noise multiplier per observation field; anything not listed is
# treated as a goal feature and explored aggressively.
_COLUMN_NOISE: Dict[str, float] = {
    "joint_angles": 1.0 / 3.0,
    "joint_velocities": 0.1,
    "torso_linear_velocity": 0.1,
    "torso_angular_velocity": 0.1,
    "last_action": 1.0 / 3.0,
    "torso_position": 1.0 / 3.0,
    "torso_euler": 1.0 / 3.0,
    "uprightness": 1.0 / 3.0,
}
_GOAL_COLUMN_NOISE = 10.0 / 3.0
_BIAS_NOISE = 1.0 / 3.0


def parameter_scale_for(task) -> np.ndarray:
    """Per-parameter preconditioner; policy params = search params * scale."""
    layout = task.layout
    columns = np.full(len(layout), _GOAL_COLUMN_NOISE)
    for f in layout.fields:
        columns[f.start: f.stop] = _COLUMN_NOISE.get(f.name,
                                                     _GOAL_COLUMN_NOISE)
    return np.concatenate([
        np.tile(columns, task.action_dim),
        np.full(task.action_dim, _BIAS_NOISE),
    ])


def hold_position_params(task) -> np.ndarray:
    """Flat params of the policy that commands the measured joint angles."""
    weights = np.zeros((task.action_dim, task.observation_dim))
    try:
        block = task.layout.slice_of("joint_angles")
    except KeyError:
        return np.concatenate([weights.ravel(), np.zeros(task.action_dim)])
    if block.stop - block.start == task.action_dim:
        weights[:, block] = np.eye(task.action_dim)
    return np.concatenate([weights.ravel(), np.zeros(task.action_dim)])


EnvOrFactory = Union[Env, Callable[[], Env]]


def cem_optimize(env_factory: EnvOrFactory, config: CemConfig,
                 on_iteration: Optional[IterationCallback] = None
                 ) -> Tuple[LinearPolicy, CemResult]:
    """Train a linear policy with CEM.

    Accepts an environment or a zero-argument factory. The environment's own
    horizon is used as-is; pass one built with ``config.train_horizon`` to
    train on shortened episodes.
    """
    env = env_factory() if callable(env_factory) else env_factory
    low = env.action_low
    high = env.action_high
    obs_dim = env.observation_dim
    scale = parameter_scale_for(env.task)
    init = hold_position_params(env.task) / scale

    def score_fn(z: np.ndarray) -> float:
        policy = LinearPolicy.from_flat(z * scale, obs_dim, low, high)
        return rollout_score(env, policy, config.episodes_per_candidate)

    result = cem_search(score_fn, len(scale), config, init_mean=init,
                        on_iteration=on_iteration, parameter_scale=scale)
    best = LinearPolicy.from_flat(result.best_params * scale, obs_dim,
                                  low, high)
    return best, result
