"""Benchmark tasks for a 9-joint manipulation claw and a 12-joint quadruped.

Quick start::

    import robobench

    env = robobench.make_env("DClawPoseFixed", seed=0)
    obs = env.reset()
    result = env.step(env.action_low * 0.0)

The same environment runs against the deterministic simulation backend or a
daisy chain of smart servos over a serial bus; see the README for the CLI.
"""

from .cem import CemConfig, CemResult, cem_optimize, cem_search
from .core import EpisodeSetup, RobotState, Task
from .env import (Env, EpisodeResult, StepResult, SuccessReport, evaluate,
                  make_env, run_episode)
from .errors import (ChecksumError, ConfigurationError, FramingError,
                     PolicyError, RobobenchError, TransportError, UsageError)
from .policies import (LinearPolicy, RandomPolicy, ZeroPolicy, load_policy,
                       save_policy)
from .registry import CATALOG, TASK_NAMES, TaskInfo, make_task, task_info
from .safety import SafetyAccumulator, SafetyCounts, SafetyLimits, count_step
from .trajlog import EpisodeLog, read_episode_log, read_episode_logs, \
    write_episode_log
from .version import VERSION

__version__ = VERSION

__all__ = [
    "CATALOG",
    "CemConfig",
    "CemResult",
    "ChecksumError",
    "ConfigurationError",
    "Env",
    "EpisodeLog",
    "EpisodeResult",
    "EpisodeSetup",
    "FramingError",
    "LinearPolicy",
    "PolicyError",
    "RandomPolicy",
    "RobotState",
    "RobobenchError",
    "SafetyAccumulator",
    "SafetyCounts",
    "SafetyLimits",
    "StepResult",
    "SuccessReport",
    "TASK_NAMES",
    "Task",
    "TaskInfo",
    "TransportError",
    "UsageError",
    "VERSION",
    "ZeroPolicy",
    "cem_optimize",
    "cem_search",
    "count_step",
    "evaluate",
    "load_policy",
    "make_env",
    "make_task",
    "read_episode_log",
    "read_episode_logs",
    "run_episode",
    "save_policy",
    "task_info",
    "write_episode_log",
]
