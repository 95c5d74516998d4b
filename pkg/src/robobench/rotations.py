"""Minimal rotation helpers (3x3 matrices, float64).

Euler convention used throughout: extrinsic X-Y-Z, i.e. R = Rz(c) @ Ry(b) @ Rx(a)
with angles returned in (a, b, c) order, radians.
"""

from __future__ import annotations

import numpy as np


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def matrix_from_euler_xyz(angles) -> np.ndarray:
    a, b, c = angles
    return rot_z(c) @ rot_y(b) @ rot_x(a)


def euler_xyz_from_matrix(R) -> np.ndarray:
    """Inverse of :func:`matrix_from_euler_xyz`.

    Gimbal-locked inputs (|R[2,0]| = 1) collapse a and c onto one axis; the
    convention here pins a = 0.
    """
    R = np.asarray(R, dtype=float)
    sb = -R[2, 0]
    sb = min(1.0, max(-1.0, sb))
    b = np.arcsin(sb)
    if abs(sb) < 1.0 - 1e-12:
        a = np.arctan2(R[2, 1], R[2, 2])
        c = np.arctan2(R[1, 0], R[0, 0])
    else:
        a = 0.0
        c = np.arctan2(-R[0, 1], R[1, 1])
    return np.array([a, b, c])


def is_rotation(R, tol: float = 1e-6) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    if not np.allclose(R.T @ R, np.eye(3), atol=tol):
        return False
    return bool(abs(np.linalg.det(R) - 1.0) <= tol)


def rotation_to_rotvec(R) -> np.ndarray:
    """Axis-angle vector (axis * angle, radians) of a proper rotation."""
    R = np.asarray(R, dtype=float)
    cos_angle = (np.trace(R) - 1.0) / 2.0
    cos_angle = min(1.0, max(-1.0, cos_angle))
    angle = np.arccos(cos_angle)
    if angle < 1e-12:
        return np.zeros(3)
    if np.pi - angle < 1e-6:
        # Near pi the off-diagonal formula degenerates; recover the axis from
        # the dominant diagonal of (R + I) / 2.
        B = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(B), 0.0))
        k = int(np.argmax(axis))
        if axis[k] > 0:
            axis = B[:, k] / axis[k]
        n = np.linalg.norm(axis)
        if n > 0:
            axis = axis / n
        return axis * angle
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    axis = axis / (2.0 * np.sin(angle))
    return axis * angle


def wrap_angle(a: float) -> float:
    """Wrap into (-pi, pi]."""
    w = float(np.arctan2(np.sin(a), np.cos(a)))
    if w == -np.pi:
        w = np.pi
    return w
