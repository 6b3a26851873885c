"""Per-token visibility from rendered splat contributions.

A splat is visible when its transmittance-weighted alpha in at least one
view exceeds a threshold; a token is valid when at least ``k_min`` of its
eight splats are visible. The default threshold is relative: 5% of the
mean contribution over on-screen splats of the view, which keeps the rule
scale-free across image resolutions.
"""

from __future__ import annotations

import numpy as np

from ..numerics import no_grad
from ..splatting import Camera, SplatBatch, lbs_transform, rasterize
from ..splatting.rig import BodyPose, SkinnedRig

REL_TAU_FACTOR = 0.05
K_MIN_DEFAULT = 2  # tokens need two of eight splats visible


def view_contributions(splats: SplatBatch, camera: Camera) -> np.ndarray:
    with no_grad():
        return rasterize(splats, camera).contributions.data


def on_screen(splats: SplatBatch, camera: Camera) -> np.ndarray:
    """Splats in front of the near plane whose center projects inside the frame."""
    pos_cam = camera.world_to_camera(np.asarray(splats.positions, dtype=np.float64))
    z = pos_cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = pos_cam[:, 0] / z * camera.fx + camera.cx
        v = pos_cam[:, 1] / z * camera.fy + camera.cy
    return (z > 1e-4) & (u >= 0) & (u < camera.width) & (v >= 0) & (v < camera.height)


def view_threshold(contributions: np.ndarray, screen_mask: np.ndarray, tau: float | None) -> float:
    """Absolute threshold for one view; relative rule when tau is None."""
    if tau is not None:
        return float(tau)
    if not screen_mask.any():
        return np.inf
    return REL_TAU_FACTOR * float(contributions[screen_mask].mean())


def splat_visibility(
    splats: SplatBatch,
    views: list[tuple[Camera, BodyPose]],
    tau: float | None = None,
    rig: SkinnedRig | None = None,
    point_weights: np.ndarray | None = None,
    splats_per_point: int = 8,
) -> np.ndarray:
    """Per-splat booleans: contribution strictly above threshold in any view.

    Views carry a body pose; when a rig and weights are given the splats
    are posed per view before rasterizing. Ties at the threshold count as
    not visible.
    """
    if not views:
        raise ValueError("splat_visibility needs at least one view")
    if tau is not None and tau <= 0:
        raise ValueError("tau must be positive")
    visible = np.zeros(len(splats), dtype=bool)
    for camera, pose in views:
        scene = splats
        if rig is not None and point_weights is not None:
            scene = lbs_transform(splats, rig, pose, point_weights, splats_per_point)
        contrib = view_contributions(scene, camera)
        threshold = view_threshold(contrib, on_screen(scene, camera), tau)
        visible |= contrib > threshold
    return visible


def token_mask(splat_visible: np.ndarray, k_min: int = K_MIN_DEFAULT) -> np.ndarray:
    """Token i is valid when >= k_min of its 8 consecutive splats are visible."""
    if len(splat_visible) % 8:
        raise ValueError(f"splat count {len(splat_visible)} is not a multiple of 8")
    groups = splat_visible.reshape(-1, 8)
    return groups.sum(axis=1) >= k_min


def compute_token_mask(
    splats: SplatBatch,
    views: list[tuple[Camera, BodyPose]],
    tau: float | None = None,
    k_min: int = K_MIN_DEFAULT,
    rig: SkinnedRig | None = None,
    point_weights: np.ndarray | None = None,
) -> np.ndarray:
    return token_mask(splat_visibility(splats, views, tau, rig, point_weights), k_min)
