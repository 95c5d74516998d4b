"""Policies: zero, uniform-random, and the linear map trained by CEM.

A policy is anything with an ``act(observation) -> action`` method (a bare
callable works too). Linear policies serialize to a single-line JSON file so
trained controllers can be shipped around and replayed byte-exactly.
"""

from __future__ import annotations

import json
import os
from typing import Any, Dict, Optional

import numpy as np

from .config import canonical_json, to_jsonable
from .errors import ConfigurationError
from .trajlog import atomic_write_text
from .version import POLICY_SCHEMA, VERSION


class ZeroPolicy:
    """Commands every joint to zero; useful as a smoke-test baseline."""

    def __init__(self, action_dim: int):
        self.action_dim = int(action_dim)

    def act(self, observation: np.ndarray) -> np.ndarray:
        return np.zeros(self.action_dim)


class RandomPolicy:
    """Uniform draws inside the joint bounds with a private generator."""

    def __init__(self, low: np.ndarray, high: np.ndarray, seed: int = 0):
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        if self.low.shape != self.high.shape:
            raise ConfigurationError("bounds must have matching shapes")
        self._rng = np.random.default_rng(seed)

    def act(self, observation: np.ndarray) -> np.ndarray:
        return self._rng.uniform(self.low, self.high)


class LinearPolicy:
    """action = clip(W @ observation + b, low, high)."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray,
                 low: np.ndarray, high: np.ndarray):
        self.weights = np.asarray(weights, dtype=float)
        self.bias = np.asarray(bias, dtype=float)
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        if self.weights.ndim != 2:
            raise ConfigurationError("weights must be a 2-d matrix")
        n_act = self.weights.shape[0]
        for name, arr in (("bias", self.bias), ("low", self.low),
                          ("high", self.high)):
            if arr.shape != (n_act,):
                raise ConfigurationError(
                    f"{name} must have shape ({n_act},), got {arr.shape}")

    @property
    def action_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def observation_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def n_params(self) -> int:
        return self.weights.size + self.bias.size

    def act(self, observation: np.ndarray) -> np.ndarray:
        observation = np.asarray(observation, dtype=float)
        raw = self.weights @ observation + self.bias
        return np.clip(raw, self.low, self.high)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.weights.ravel(), self.bias])

    @classmethod
    def from_flat(cls, theta: np.ndarray, observation_dim: int,
                  low: np.ndarray, high: np.ndarray) -> "LinearPolicy":
        low = np.asarray(low, dtype=float)
        action_dim = low.shape[0]
        theta = np.asarray(theta, dtype=float)
        expected = action_dim * observation_dim + action_dim
        if theta.shape != (expected,):
            raise ConfigurationError(
                f"parameter vector must have length {expected}, "
                f"got {theta.shape}")
        weights = theta[: action_dim * observation_dim].reshape(
            action_dim, observation_dim)
        bias = theta[action_dim * observation_dim:]
        return cls(weights, bias, low, high)

    @classmethod
    def param_count(cls, observation_dim: int, action_dim: int) -> int:
        return action_dim * observation_dim + action_dim


def save_policy(path: str, policy: LinearPolicy,
                meta: Optional[Dict[str, Any]] = None) -> None:
    doc = {
        "schema": POLICY_SCHEMA,
        "version": VERSION,
        "kind": "linear",
        "observation_dim": policy.observation_dim,
        "action_dim": policy.action_dim,
        "weights": to_jsonable(policy.weights),
        "bias": to_jsonable(policy.bias),
        "low": to_jsonable(policy.low),
        "high": to_jsonable(policy.high),
        "meta": to_jsonable(meta or {}),
    }
    atomic_write_text(path, canonical_json(doc) + "\n")


def load_policy(path: str) -> LinearPolicy:
    if not os.path.isfile(path):
        raise ConfigurationError(f"policy file not found: {path}")
    with open(path, "r", encoding="ascii") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid policy file: {exc}") \
                from None
    if doc.get("schema") != POLICY_SCHEMA:
        raise ConfigurationError(
            f"{path}: unsupported policy schema {doc.get('schema')!r}")
    if doc.get("kind") != "linear":
        raise ConfigurationError(
            f"{path}: unsupported policy kind {doc.get('kind')!r}")
    policy = LinearPolicy(
        np.asarray(doc["weights"], dtype=float),
        np.asarray(doc["bias"], dtype=float),
        np.asarray(doc["low"], dtype=float),
        np.asarray(doc["high"], dtype=float),
    )
    if policy.observation_dim != doc.get("observation_dim") or \
            policy.action_dim != doc.get("action_dim"):
        raise ConfigurationError(f"{path}: dimension fields disagree with "
                                 f"the stored matrices")
    return policy


def make_builtin_policy(name: str, action_low: np.ndarray,
                        action_high: np.ndarray, seed: int = 0) -> Any:
    """Resolve the --policy argument: a builtin name or a saved policy file."""
    if name == "zero":
        return ZeroPolicy(len(action_low))
    if name == "random":
        return RandomPolicy(action_low, action_high, seed=seed)
    if name.endswith(".json"):
        return load_policy(name)
    raise ConfigurationError(
        f"unknown policy {name!r}: expected 'zero', 'random', or a .json file")
