"""Catalog of the 18 benchmark tasks.

Names are <family><level>, e.g. "DClawTurnRandomDynamics". Levels: Fixed
(constant goals), Random (goals sampled per episode), RandomDynamics (goals
plus plant randomization).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from .core import Task
from .dclaw import ClawPoseTask, ClawScrewTask, ClawTurnTask
from .dkitty import KittyOrientTask, KittyStandTask, KittyWalkTask
from .errors import ConfigurationError

LEVELS = ("Fixed", "Random", "RandomDynamics")

_FAMILIES: Dict[str, type] = {
    "DClawPose": ClawPoseTask,
    "DClawTurn": ClawTurnTask,
    "DClawScrew": ClawScrewTask,
    "DKittyStand": KittyStandTask,
    "DKittyOrient": KittyOrientTask,
    "DKittyWalk": KittyWalkTask,
}


@dataclass(frozen=True)
class TaskInfo:
    name: str
    family: str
    level: str
    robot: str
    observation_dim: int
    action_dim: int


def _build_catalog() -> Dict[str, TaskInfo]:
    catalog = {}
    for family, cls in _FAMILIES.items():
        for level in LEVELS:
            probe = cls(level)
            catalog[f"{family}{level}"] = TaskInfo(
                name=f"{family}{level}",
                family=family,
                level=level,
                robot=cls.robot,
                observation_dim=probe.observation_dim,
                action_dim=probe.action_dim,
            )
    return catalog


CATALOG: Dict[str, TaskInfo] = _build_catalog()
TASK_NAMES: Tuple[str, ...] = tuple(CATALOG)


def task_info(name: str) -> TaskInfo:
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown task {name!r}; run the list command for the catalog"
        ) from None


def make_task(name: str, dt: float = 0.1) -> Task:
    info = task_info(name)
    return _FAMILIES[info.family](info.level, dt=dt)
