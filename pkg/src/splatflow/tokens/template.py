"""Shared template body surface: query points, normals, regions, weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import SeedStream
from ..splatting import SkinnedRig, humanoid_rig
from .wardrobe import REGION_HAIR, REGION_LOWER, REGION_SHOE, REGION_SKIN, REGION_UPPER

PELVIS_HEIGHT = -0.1
FRONT_NORMAL_MIN = 0.25  # points with normal z below this count as not front-facing

# Capsules composing the humanoid surface: (name, endpoint a, endpoint b, radius).
_CAPSULES = [
    ("torso", (0.0, -0.05, 0.0), (0.0, 0.50, 0.0), 0.17),
    ("head", (0.0, 0.66, 0.0), (0.0, 0.66, 0.0), 0.13),
    ("arm_l", (-0.18, 0.45, 0.0), (-0.72, 0.45, 0.0), 0.06),
    ("arm_r", (0.18, 0.45, 0.0), (0.72, 0.45, 0.0), 0.06),
    ("leg_l", (-0.14, -0.02, 0.0), (-0.14, -0.90, 0.0), 0.08),
    ("leg_r", (0.14, -0.02, 0.0), (0.14, -0.90, 0.0), 0.08),
]

UPPER_BODY_ARM_REACH = 0.45  # |x| beyond this falls outside the upper-body frame

_HAND_X = 0.58
_SHOE_Y = -0.78


@dataclass
class QueryPointSet:
    """Fixed query points on the template surface, shared by all identities."""

    points: np.ndarray        # (N, 3)
    normals: np.ndarray       # (N, 3) outward
    regions: np.ndarray       # (N,) wardrobe region index
    skin_weights: np.ndarray  # (N, J)
    point_radius: float       # typical half-spacing, anchors splat sizing
    seed: int

    @property
    def n_points(self) -> int:
        return len(self.points)

    def below_pelvis(self) -> np.ndarray:
        return self.points[:, 1] < PELVIS_HEIGHT

    def front_facing(self) -> np.ndarray:
        return self.normals[:, 2] >= FRONT_NORMAL_MIN


def _capsule_area(a, b, r) -> float:
    length = float(np.linalg.norm(np.subtract(b, a)))
    return 2.0 * np.pi * r * length + 4.0 * np.pi * r * r


def _inside_capsule(points: np.ndarray, a, b, r, slack: float = 1e-9) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-12:
        d = points - a
    else:
        t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
        d = points - (a + t[:, None] * ab)
    return (d * d).sum(axis=1) < (r - slack) ** 2


def _sample_capsule(stream: SeedStream, a, b, r, count: int):
    """Uniform surface samples with outward normals."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    length = float(np.linalg.norm(b - a))
    side_area = 2.0 * np.pi * r * length
    cap_area = 4.0 * np.pi * r * r
    axis = (b - a) / length if length > 0 else np.array([0.0, 1.0, 0.0])
    # Orthonormal frame around the axis.
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)

    pts = np.empty((count, 3))
    nrm = np.empty((count, 3))
    u = stream.uniform(0.0, side_area + cap_area, (count,))
    theta = stream.uniform(0.0, 2.0 * np.pi, (count,))
    tpos = stream.uniform(0.0, 1.0, (count,))
    sphere = stream.normal((count, 3))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)

    on_side = u < side_area
    ring = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    pts[on_side] = a + tpos[on_side, None] * (b - a) + r * ring[on_side]
    nrm[on_side] = ring[on_side]

    caps = ~on_side
    towards_b = sphere @ axis > 0
    center = np.where(towards_b[:, None], b, a)
    direction = sphere.copy()
    pts[caps] = center[caps] + r * direction[caps]
    nrm[caps] = direction[caps]
    return pts, nrm


def _assign_region(name: str, pts: np.ndarray, nrm: np.ndarray) -> np.ndarray:
    n = len(pts)
    region = np.empty(n, dtype=np.int64)
    if name == "torso":
        region[:] = REGION_UPPER
    elif name == "head":
        hair = (nrm[:, 2] < 0.2) | (pts[:, 1] > 0.72)
        region[:] = np.where(hair, REGION_HAIR, REGION_SKIN)
    elif name.startswith("arm"):
        region[:] = np.where(np.abs(pts[:, 0]) > _HAND_X, REGION_SKIN, REGION_UPPER)
    else:  # legs
        region[:] = np.where(pts[:, 1] < _SHOE_Y, REGION_SHOE, REGION_LOWER)
    return region


def make_template(n_points: int, seed: int, rig: SkinnedRig | None = None) -> QueryPointSet:
    """Deterministic query point set on the capsule-composite humanoid.

    Points are allocated to capsules by surface area and sampled uniformly
    on each; skin weights come from the fixed rig.
    """
    if n_points < 8:
        raise ValueError(f"n_points must be >= 8, got {n_points}")
    rig = rig if rig is not None else humanoid_rig()
    stream = SeedStream(seed).child("template")

    areas = np.array([_capsule_area(a, b, r) for _, a, b, r in _CAPSULES])
    counts = np.floor(areas / areas.sum() * n_points).astype(int)
    # Distribute the remainder deterministically to the largest capsules.
    for i in np.argsort(-areas)[: n_points - counts.sum()]:
        counts[i] += 1

    pts_parts, nrm_parts, region_parts = [], [], []
    for idx, ((name, a, b, r), count) in enumerate(zip(_CAPSULES, counts)):
        # Union-surface sampling: points landing inside another capsule are
        # interior geometry, never visible, and get resampled.
        sub = stream.child(f"capsule/{name}")
        pts = np.empty((0, 3))
        nrm = np.empty((0, 3))
        while len(pts) < count:
            cand_p, cand_n = _sample_capsule(sub, a, b, r, 2 * count)
            outside = np.ones(len(cand_p), dtype=bool)
            for j, (_, oa, ob, orad) in enumerate(_CAPSULES):
                if j != idx:
                    outside &= ~_inside_capsule(cand_p, oa, ob, orad)
            pts = np.concatenate([pts, cand_p[outside]])
            nrm = np.concatenate([nrm, cand_n[outside]])
        pts, nrm = pts[:count], nrm[:count]
        pts_parts.append(pts)
        nrm_parts.append(nrm)
        region_parts.append(_assign_region(name, pts, nrm))

    points = np.concatenate(pts_parts)
    normals = np.concatenate(nrm_parts)
    regions = np.concatenate(region_parts)
    order = stream.child("shuffle").permutation(n_points)
    points, normals, regions = points[order], normals[order], regions[order]

    weights = rig.skin_weights(points)
    radius = 0.5 * float(np.sqrt(areas.sum() / n_points))
    return QueryPointSet(
        points=points,
        normals=normals,
        regions=regions,
        skin_weights=weights,
        point_radius=radius,
        seed=seed,
    )
