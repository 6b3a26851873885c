"""Brute-force visibility oracle, independent of the rasterizer path.

Contributions are recomputed pixel by pixel with a plain running
transmittance over depth-ordered splats; only the threshold semantics are
shared by definition. Limited to small scenes.
"""

from __future__ import annotations

import numpy as np

from ..splatting import Camera, SplatBatch, lbs_transform
from ..splatting.rig import BodyPose, SkinnedRig
from ..splatting.rasterize import ALPHA_MAX, BLUR, Z_NEAR
from .mask import K_MIN_DEFAULT, REL_TAU_FACTOR

MAX_SPLATS = 4096
MAX_PIXELS = 64 * 64


def _project_brute(splats: SplatBatch, camera: Camera):
    """Independent re-derivation of means, covariances, and validity."""
    pos = np.asarray(splats.positions, dtype=np.float64)
    cam = pos @ camera.rotation.T + camera.translation
    z = cam[:, 2]

    q = np.asarray(splats.rotations, dtype=np.float64)
    q = q / np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, zz = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    rot = np.empty((len(q), 3, 3))
    rot[:, 0, 0] = 1 - 2 * (y * y + zz * zz)
    rot[:, 0, 1] = 2 * (x * y - w * zz)
    rot[:, 0, 2] = 2 * (x * zz + w * y)
    rot[:, 1, 0] = 2 * (x * y + w * zz)
    rot[:, 1, 1] = 1 - 2 * (x * x + zz * zz)
    rot[:, 1, 2] = 2 * (y * zz - w * x)
    rot[:, 2, 0] = 2 * (x * zz - w * y)
    rot[:, 2, 1] = 2 * (y * zz + w * x)
    rot[:, 2, 2] = 1 - 2 * (x * x + y * y)

    var = np.exp(2.0 * np.asarray(splats.log_scales, dtype=np.float64))
    sigma_w = np.einsum("sab,sb,scb->sac", rot, var, rot)
    sigma_c = np.einsum("ab,sbc,dc->sad", camera.rotation, sigma_w, camera.rotation)

    valid = z > Z_NEAR
    zs = np.where(valid, z, 1.0)
    u = cam[:, 0] / zs * camera.fx + camera.cx
    v = cam[:, 1] / zs * camera.fy + camera.cy

    j00 = camera.fx / zs
    j11 = camera.fy / zs
    j02 = -camera.fx * cam[:, 0] / (zs * zs)
    j12 = -camera.fy * cam[:, 1] / (zs * zs)
    jac = np.zeros((len(q), 2, 3))
    jac[:, 0, 0] = j00
    jac[:, 0, 2] = j02
    jac[:, 1, 1] = j11
    jac[:, 1, 2] = j12
    cov = np.einsum("sab,sbc,sdc->sad", jac, sigma_c, jac) + BLUR * np.eye(2)
    det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
    valid &= det > 1e-12
    return z, u, v, cov, det, valid


def oracle_contributions(splats: SplatBatch, camera: Camera) -> np.ndarray:
    """Per-splat transmittance-weighted alpha, summed per pixel in python."""
    s = len(splats)
    if s > MAX_SPLATS or camera.width * camera.height > MAX_PIXELS:
        raise ValueError(
            f"oracle limited to {MAX_SPLATS} splats and {MAX_PIXELS} pixels, "
            f"got {s} splats at {camera.width}x{camera.height}"
        )
    contrib = np.zeros(s)
    if s == 0:
        return contrib
    z, u, v, cov, det, valid = _project_brute(splats, camera)
    keep = np.nonzero(valid)[0]
    if keep.size == 0:
        return contrib
    # Depth order with explicit index tiebreak.
    order = keep[np.lexsort((keep, z[keep]))]
    inv_a = cov[order, 1, 1] / det[order]
    inv_b = -cov[order, 0, 1] / det[order]
    inv_c = cov[order, 0, 0] / det[order]
    op = 1.0 / (1.0 + np.exp(-np.asarray(splats.opacity_logits, dtype=np.float64)[order]))
    uu, vv = u[order], v[order]

    acc = np.zeros(order.size)
    for row in range(camera.height):
        py = row + 0.5
        for colm in range(camera.width):
            px = colm + 0.5
            dx = px - uu
            dy = py - vv
            quad = inv_a * dx * dx + 2.0 * inv_b * dx * dy + inv_c * dy * dy
            alpha = np.minimum(op * np.exp(-0.5 * quad), ALPHA_MAX)
            one_minus = 1.0 - alpha
            trans = np.concatenate([[1.0], np.cumprod(one_minus)[:-1]])
            acc += alpha * trans
    contrib[order] = acc
    return contrib


def oracle_mask(
    splats: SplatBatch,
    views: list[tuple[Camera, BodyPose]],
    tau: float | None = None,
    k_min: int = K_MIN_DEFAULT,
    rig: SkinnedRig | None = None,
    point_weights: np.ndarray | None = None,
) -> np.ndarray:
    """Exhaustively recomputed token mask; must equal the pipeline mask."""
    if not views:
        raise ValueError("oracle_mask needs at least one view")
    s = len(splats)
    if s % 8:
        raise ValueError(f"splat count {s} is not a multiple of 8")
    visible = np.zeros(s, dtype=bool)
    for camera, pose in views:
        scene = splats
        if rig is not None and point_weights is not None:
            scene = lbs_transform(splats, rig, pose, point_weights)
        contrib = oracle_contributions(scene, camera)
        if tau is not None:
            threshold = float(tau)
        else:
            pos_cam = scene.positions @ camera.rotation.T + camera.translation
            zc = pos_cam[:, 2]
            with np.errstate(divide="ignore", invalid="ignore"):
                uc = pos_cam[:, 0] / zc * camera.fx + camera.cx
                vc = pos_cam[:, 1] / zc * camera.fy + camera.cy
            screen = (zc > Z_NEAR) & (uc >= 0) & (uc < camera.width) & (vc >= 0) & (vc < camera.height)
            threshold = REL_TAU_FACTOR * float(contrib[screen].mean()) if screen.any() else np.inf
        visible |= contrib > threshold
    return visible.reshape(-1, 8).sum(axis=1) >= k_min
