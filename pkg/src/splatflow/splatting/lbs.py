"""Linear blend skinning of splat batches."""

from __future__ import annotations

import numpy as np

from .rig import BodyPose, SkinnedRig, joint_world_transforms, quat_multiply, quat_normalize
from .splats import SplatBatch


def lbs_apply(
    splats: SplatBatch,
    point_weights: np.ndarray,
    joint_rots: np.ndarray,
    joint_trans: np.ndarray,
    joint_quats: np.ndarray,
    rest_positions: np.ndarray,
    splats_per_point: int = 8,
) -> SplatBatch:
    """Blend explicit posed joint world transforms onto a splat batch.

    Positions use the delta form p + sum_j w_j ((R_j - I) p + t_j - R_j r_j),
    which makes an identity pose exactly the identity map. Each splat
    rotation is composed with the weight-blended joint rotation
    (hemisphere-aligned quaternion average); scales are untouched.
    """
    s = len(splats)
    n_points = point_weights.shape[0]
    if s % splats_per_point != 0 or s // splats_per_point != n_points:
        raise ValueError(
            f"splat count {s} must be {splats_per_point} per query point ({n_points} points)"
        )

    weights = np.repeat(point_weights, splats_per_point, axis=0)  # (S, J)
    pos = np.asarray(splats.positions, dtype=np.float64)

    a_mats = joint_rots - np.eye(3)
    biases = joint_trans - np.einsum("jab,jb->ja", joint_rots, rest_positions)
    deltas = np.einsum("jab,sb->jsa", a_mats, pos) + biases[:, None, :]
    new_pos = pos + np.einsum("sj,jsa->sa", weights, deltas)

    dominant = np.argmax(weights, axis=1)
    ref = joint_quats[dominant]  # (S, 4)
    dots = ref @ joint_quats.T   # (S, J)
    signs = np.where(dots < 0.0, -1.0, 1.0)
    blended = quat_normalize((weights * signs) @ joint_quats)
    new_rot = quat_multiply(blended, quat_normalize(np.asarray(splats.rotations, dtype=np.float64)))

    return SplatBatch(
        positions=new_pos,
        log_scales=np.asarray(splats.log_scales, dtype=np.float64).copy(),
        rotations=new_rot,
        opacity_logits=np.asarray(splats.opacity_logits, dtype=np.float64).copy(),
        colors=np.asarray(splats.colors, dtype=np.float64).copy(),
    )


def lbs_transform(
    splats: SplatBatch,
    rig: SkinnedRig,
    pose: BodyPose,
    point_weights: np.ndarray,
    splats_per_point: int = 8,
) -> SplatBatch:
    """Pose a splat batch by its owning query points' skin weights."""
    rig.validate_weights(point_weights)
    rots, trans, quats = joint_world_transforms(rig, pose)
    return lbs_apply(
        splats,
        point_weights,
        rots,
        trans,
        quats,
        rig.rest_positions,
        splats_per_point=splats_per_point,
    )
