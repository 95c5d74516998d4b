"""Forward kinematics for both robots, rigid-pose fitting, and terrain.

Claw fingers and quadruped legs are short serial chains; feet and fingertips
are treated as points. The quadruped torso pose is recovered by a
least-squares rigid fit of the stance feet onto their world anchors (SVD
orthogonal-Procrustes solution), which is the quasi-static stand-in for
contact dynamics used by the simulation backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError
from .robots import ClawGeometry, KittyGeometry
from .rotations import rot_x, rot_y, rot_z


def fingertip_positions(
    qpos: np.ndarray,
    geometry: ClawGeometry,
    base_shift: Tuple[float, float] = (0.0, 0.0),
    base_yaw: float = 0.0,
) -> np.ndarray:
    """World fingertip points, one row per finger.

    Each finger is (base yaw about vertical, upper pitch, lower pitch) hanging
    from a mount that faces the valve axis. ``base_shift``/``base_yaw``
    displace the whole claw relative to the valve (used by dynamics
    randomization).
    """
    qpos = np.asarray(qpos, dtype=float)
    if qpos.shape != (9,):
        raise ConfigurationError("claw kinematics expect 9 joint angles")
    shift = np.array([base_shift[0], base_shift[1], 0.0])
    yaw = rot_z(base_yaw)
    tips = np.empty((3, 3))
    for f, azimuth in enumerate(geometry.finger_azimuths):
        q0, q1, q2 = qpos[3 * f : 3 * f + 3]
        upper = rot_y(q1)
        tip_local = rot_z(q0) @ (
            upper @ np.array([0.0, 0.0, -geometry.link1])
            + upper @ rot_y(q2) @ np.array([0.0, 0.0, -geometry.link2])
        )
        base = np.array(
            [
                geometry.base_radius * np.cos(azimuth),
                geometry.base_radius * np.sin(azimuth),
                geometry.base_height,
            ]
        )
        # Mount frame: local +x points inward at the valve axis.
        mount = rot_z(azimuth + np.pi)
        tips[f] = yaw @ (base + mount @ tip_local) + shift
    return tips


def foot_positions(qpos: np.ndarray, geometry: KittyGeometry) -> np.ndarray:
    """Torso-frame foot points, one row per leg.

    Legs are (abduction about torso y, hip pitch about torso x, knee pitch
    about torso x); pitch swings move feet in the fore-aft plane. The same
    sign convention is used on all four legs, so the all-zero pose stands
    with every foot directly under its hip.
    """
    qpos = np.asarray(qpos, dtype=float)
    if qpos.shape != (12,):
        raise ConfigurationError("quadruped kinematics expect 12 joint angles")
    hips = geometry.hip_positions()
    feet = np.empty((4, 3))
    for leg in range(4):
        q0, q1, q2 = qpos[3 * leg : 3 * leg + 3]
        swing = rot_y(q0) @ rot_x(q1)
        foot = swing @ np.array([0.0, 0.0, -geometry.thigh])
        foot = foot + swing @ rot_x(q2) @ np.array([0.0, 0.0, -geometry.shank])
        feet[leg] = hips[leg] + foot
    return feet


def rigid_fit(local: np.ndarray, world: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rotation R and translation t minimizing sum ||R p + t - q||^2.

    Standard SVD solution with the determinant correction, so R is always a
    proper rotation even for reflective point sets. Needs >= 3 points.
    """
    local = np.asarray(local, dtype=float)
    world = np.asarray(world, dtype=float)
    if local.shape != world.shape or local.ndim != 2 or local.shape[1] != 3:
        raise ConfigurationError("rigid fit expects matching (n, 3) point sets")
    if local.shape[0] < 3:
        raise ConfigurationError("rigid fit needs at least 3 point pairs")
    p_mean = local.mean(axis=0)
    q_mean = world.mean(axis=0)
    cross = (local - p_mean).T @ (world - q_mean)
    u, _, vt = np.linalg.svd(cross)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0:
        d = 1.0
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    trans = q_mean - rot @ p_mean
    return rot, trans


class Terrain:
    """Ground height lookup: flat by default, or a bilinear grid patch."""

    def __init__(self, heights: Optional[np.ndarray] = None,
                 extent: float = 4.0):
        if heights is None:
            self._grid = None
        else:
            grid = np.asarray(heights, dtype=float)
            if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 2:
                raise ConfigurationError("terrain grid must be at least 2x2")
            self._grid = grid
        self._extent = float(extent)

    @property
    def flat(self) -> bool:
        return self._grid is None

    @property
    def heights(self) -> Optional[np.ndarray]:
        return self._grid

    def height_at(self, x: float, y: float) -> float:
        """Interpolated ground height; points beyond the patch clamp to its edge."""
        if self._grid is None:
            return 0.0
        grid = self._grid
        half = self._extent / 2.0
        # Map world coords into fractional grid indices.
        fx = (np.clip(x, -half, half) + half) / self._extent * (grid.shape[0] - 1)
        fy = (np.clip(y, -half, half) + half) / self._extent * (grid.shape[1] - 1)
        i0 = min(int(fx), grid.shape[0] - 2)
        j0 = min(int(fy), grid.shape[1] - 2)
        ax, ay = fx - i0, fy - j0
        return float(
            grid[i0, j0] * (1 - ax) * (1 - ay)
            + grid[i0 + 1, j0] * ax * (1 - ay)
            + grid[i0, j0 + 1] * (1 - ax) * ay
            + grid[i0 + 1, j0 + 1] * ax * ay
        )
