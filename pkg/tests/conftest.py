import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from robobench.core import RobotState
from robobench.robots import DCLAW, DKITTY


def random_rotation(rng):
    return Rotation.from_rotvec(rng.uniform(-np.pi, np.pi, size=3)).as_matrix()


def random_claw_state(rng):
    return RobotState(
        qpos=rng.uniform(-2.0, 2.0, size=9),
        qvel=rng.uniform(-8.0, 8.0, size=9),
        current=rng.uniform(0.0, 4.0, size=9),
        object_angle=float(rng.uniform(-12.0, 12.0)),
        object_velocity=float(rng.uniform(-3.0, 3.0)),
    )


def random_kitty_state(rng):
    return RobotState(
        qpos=rng.uniform(-2.0, 2.0, size=12),
        qvel=rng.uniform(-8.0, 8.0, size=12),
        current=rng.uniform(0.0, 4.0, size=12),
        base_position=rng.uniform(-1.0, 1.0, size=3),
        base_rotation=random_rotation(rng),
        base_linear_velocity=rng.uniform(-1.0, 1.0, size=3),
        base_angular_velocity=rng.uniform(-3.0, 3.0, size=3),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def dclaw_spec():
    return DCLAW


@pytest.fixture
def dkitty_spec():
    return DKITTY
