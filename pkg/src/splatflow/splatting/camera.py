"""Pinhole cameras (OpenCV convention: x right, y down, z forward)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Camera:
    rotation: np.ndarray     # (3, 3) world -> camera
    translation: np.ndarray  # (3,)
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3) or np.abs(r @ r.T - np.eye(3)).max() > 1e-6:
            raise ValueError("camera rotation must be orthonormal within 1e-6")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64))

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened sample coordinates of all pixel centers (u then v)."""
        us = np.arange(self.width, dtype=np.float64) + 0.5
        vs = np.arange(self.height, dtype=np.float64) + 0.5
        uu, vv = np.meshgrid(us, vs)
        return uu.reshape(-1), vv.reshape(-1)


def look_at(
    eye,
    target,
    width: int,
    height: int,
    fov_y_deg: float = 40.0,
    up=(0.0, 1.0, 0.0),
) -> Camera:
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    forward = target - eye
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, up)
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    translation = -rotation @ eye
    fy = 0.5 * height / np.tan(np.deg2rad(fov_y_deg) / 2.0)
    return Camera(
        rotation=rotation,
        translation=translation,
        fx=fy,
        fy=fy,
        cx=width / 2.0,
        cy=height / 2.0,
        width=width,
        height=height,
    )
