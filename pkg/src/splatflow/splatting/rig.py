"""Skeleton, poses, and forward kinematics for the fixed humanoid rig."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROOT_SENTINEL = -1

JOINT_NAMES = ["root", "spine", "head", "arm_l", "arm_r", "leg_l", "leg_r", "pelvis"]


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices from (..., 4) quaternions in (w, x, y, z) order."""
    q = quat_normalize(np.asarray(q, dtype=np.float64))
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    half = angle_rad / 2.0
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


@dataclass
class BodyPose:
    """Per-joint local rotations plus a root translation."""

    quats: np.ndarray             # (J, 4)
    root_translation: np.ndarray  # (3,)

    def __post_init__(self):
        self.quats = quat_normalize(np.asarray(self.quats, dtype=np.float64))
        self.root_translation = np.asarray(self.root_translation, dtype=np.float64)

    @classmethod
    def identity(cls, n_joints: int) -> "BodyPose":
        q = np.zeros((n_joints, 4))
        q[:, 0] = 1.0
        return cls(q, np.zeros(3))

    @classmethod
    def random(cls, stream, n_joints: int, max_angle_deg: float = 25.0) -> "BodyPose":
        """Draw a pose from the valid joint-rotation range."""
        quats = np.zeros((n_joints, 4))
        for j in range(n_joints):
            axis = stream.normal((3,))
            axis = axis / (np.linalg.norm(axis) + 1e-12)
            angle = np.deg2rad(float(stream.uniform(-max_angle_deg, max_angle_deg)))
            quats[j] = quat_from_axis_angle(axis, angle)
        return cls(quats, np.zeros(3))


@dataclass
class SkinnedRig:
    """Joint tree with rest pose and per-query-point skin weights support.

    ``local_offsets[j]`` is the rest offset of joint j from its parent
    (from the origin for the root). Rest positions are derived by the same
    accumulation used in forward kinematics, so an identity pose reproduces
    them bitwise.
    """

    parents: np.ndarray        # (J,) int, ROOT_SENTINEL for the root
    local_offsets: np.ndarray  # (J, 3)
    bone_tips: np.ndarray      # (J, 3) rest-space tip of each influence segment
    joint_names: list[str]

    def __post_init__(self):
        p = np.asarray(self.parents)
        if p[0] != ROOT_SENTINEL or np.any(p[1:] >= np.arange(1, len(p))):
            raise ValueError("parents must form a tree rooted at joint 0, parent-first order")

    @property
    def n_joints(self) -> int:
        return len(self.parents)

    @property
    def rest_positions(self) -> np.ndarray:
        rest = np.zeros((self.n_joints, 3))
        for j in range(self.n_joints):
            parent = self.parents[j]
            base = np.zeros(3) if parent == ROOT_SENTINEL else rest[parent]
            rest[j] = base + self.local_offsets[j]
        return rest

    def skin_weights(self, points: np.ndarray, sigma: float = 0.07) -> np.ndarray:
        """Smooth bone-distance weights; each row is normalized to sum to 1."""
        rest = self.rest_positions
        d2 = np.empty((len(points), self.n_joints))
        for j in range(self.n_joints):
            d2[:, j] = _point_segment_sq_dist(points, rest[j], self.bone_tips[j])
        w = np.exp(-d2 / (2.0 * sigma * sigma))
        return w / w.sum(axis=1, keepdims=True)

    def validate_weights(self, weights: np.ndarray) -> None:
        if weights.shape[1] != self.n_joints:
            raise ValueError(f"weight rows have {weights.shape[1]} joints, rig has {self.n_joints}")
        if np.any(weights < 0) or np.abs(weights.sum(axis=1) - 1.0).max() > 1e-6:
            raise ValueError("skin weight rows must be nonnegative and sum to 1 within 1e-6")


def _point_segment_sq_dist(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-12:
        d = points - a
        return (d * d).sum(axis=1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    d = points - proj
    return (d * d).sum(axis=1)


def humanoid_rig() -> SkinnedRig:
    """The fixed 8-joint desk-scale humanoid: root, spine, head, arms, legs, pelvis."""
    parents = np.array([ROOT_SENTINEL, 0, 1, 1, 1, 0, 0, 0])
    offsets = np.array(
        [
            [0.0, 0.0, 0.0],      # root at hip center
            [0.0, 0.25, 0.0],     # spine
            [0.0, 0.30, 0.0],     # head
            [-0.18, 0.20, 0.0],   # arm_l shoulder
            [0.18, 0.20, 0.0],    # arm_r shoulder
            [-0.14, -0.02, 0.0],  # leg_l hip
            [0.14, -0.02, 0.0],   # leg_r hip
            [0.0, -0.08, 0.0],    # pelvis
        ]
    )
    tips = np.array(
        [
            [0.0, 0.25, 0.0],
            [0.0, 0.50, 0.0],
            [0.0, 0.78, 0.0],
            [-0.72, 0.45, 0.0],
            [0.72, 0.45, 0.0],
            [-0.14, -0.90, 0.0],
            [0.14, -0.90, 0.0],
            [0.0, -0.14, 0.0],
        ]
    )
    return SkinnedRig(parents=parents, local_offsets=offsets, bone_tips=tips, joint_names=list(JOINT_NAMES))


def joint_world_transforms(rig: SkinnedRig, pose: BodyPose):
    """Forward kinematics: world rotation matrices, translations, and quats."""
    j_n = rig.n_joints
    rot_local = quat_to_matrix(pose.quats)
    rots = np.empty((j_n, 3, 3))
    trans = np.empty((j_n, 3))
    quats = np.empty((j_n, 4))
    for j in range(j_n):
        parent = rig.parents[j]
        if parent == ROOT_SENTINEL:
            rots[j] = rot_local[j]
            trans[j] = rig.local_offsets[j] + pose.root_translation
            quats[j] = pose.quats[j]
        else:
            rots[j] = rots[parent] @ rot_local[j]
            trans[j] = rots[parent] @ rig.local_offsets[j] + trans[parent]
            quats[j] = quat_multiply(quats[parent], pose.quats[j])
    return rots, trans, quats
