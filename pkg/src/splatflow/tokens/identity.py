"""Synthetic identity generation with controllable partial observability."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics import SeedStream
from ..splatting import BodyPose, Camera, SplatBatch, humanoid_rig, look_at
from .detokenize import splats_from_dof
from .encoding import (
    COLOR_SLICE,
    OFFSET_SLICE,
    OPACITY_SLICE,
    SCALE_SLICE,
    TokenCodec,
)
from .template import FRONT_NORMAL_MIN, UPPER_BODY_ARM_REACH, QueryPointSet
from .wardrobe import IdentityLabels, make_labels, smooth_field

COVERAGE_CLASSES = ["full-turn", "frontal-only", "upper-body-only"]

# Corruption applied to tokens of unobserved points, mimicking the
# blurred-and-transparent artifact pattern of partial reconstructions.
CORRUPT_COLOR_SHRINK = 0.3   # colors pulled toward mid-gray
CORRUPT_SCALE_BUMP = 2.0     # dof units: splats inflate (blur)
CORRUPT_OPACITY_DROP = 2.0   # dof units: opacity collapses


@dataclass
class ObservabilityProfile:
    """The views standing in for an identity's input frames."""

    coverage_class: str
    views: list[tuple[Camera, BodyPose]] = field(default_factory=list)

    def __post_init__(self):
        if self.coverage_class not in COVERAGE_CLASSES:
            raise ValueError(f"unknown coverage class {self.coverage_class!r}")
        if not self.views:
            raise ValueError("a profile needs at least one view")


def orbit_camera(
    yaw_deg: float,
    elev_deg: float = 0.0,
    distance: float = 3.0,
    target=(0.0, -0.06, 0.0),
    width: int = 48,
    height: int = 48,
    fov_y_deg: float = 40.0,
) -> Camera:
    yaw = np.deg2rad(yaw_deg)
    elev = np.deg2rad(elev_deg)
    target = np.asarray(target, dtype=np.float64)
    eye = target + distance * np.array(
        [np.sin(yaw) * np.cos(elev), np.sin(elev), np.cos(yaw) * np.cos(elev)]
    )
    return look_at(eye, target, width, height, fov_y_deg=fov_y_deg)


def build_profile(coverage_class: str, n_joints: int, resolution: int = 48) -> ObservabilityProfile:
    """Default view sets per coverage class (frontal = +z side of the body)."""
    rest = BodyPose.identity(n_joints)
    if coverage_class == "full-turn":
        yaws = [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]
        views = [(orbit_camera(y, width=resolution, height=resolution), rest) for y in yaws]
        views.append((orbit_camera(0.0, -30.0, width=resolution, height=resolution), rest))
        views.append((orbit_camera(180.0, -30.0, width=resolution, height=resolution), rest))
    elif coverage_class == "frontal-only":
        views = [
            (orbit_camera(y, width=resolution, height=resolution), rest)
            for y in (-20.0, 0.0, 20.0)
        ]
    else:  # upper-body-only
        views = [
            (
                orbit_camera(
                    y,
                    distance=1.8,
                    target=(0.0, 0.32, 0.0),
                    width=resolution,
                    height=resolution,
                    fov_y_deg=30.0,
                ),
                rest,
            )
            for y in (-15.0, 0.0, 15.0)
        ]
    return ObservabilityProfile(coverage_class, views)


def corruption_mask(template: QueryPointSet, coverage_class: str) -> np.ndarray:
    """Geometric predicate: which query points the profile cannot observe."""
    if coverage_class == "full-turn":
        return np.zeros(template.n_points, dtype=bool)
    not_front = template.normals[:, 2] < FRONT_NORMAL_MIN
    if coverage_class == "frontal-only":
        return not_front
    out_of_frame = np.abs(template.points[:, 0]) > UPPER_BODY_ARM_REACH
    return not_front | template.below_pelvis() | out_of_frame


@dataclass
class SynthIdentity:
    identity_id: str
    tokens: np.ndarray          # (N, D_T)
    gt_splats: SplatBatch       # clean decode, 8 per point
    labels: IdentityLabels
    corrupted: np.ndarray       # (N,) bool
    profile: ObservabilityProfile


def synth_identity(
    template: QueryPointSet,
    style_stream: SeedStream,
    profile: ObservabilityProfile,
    codec: TokenCodec,
    identity_id: str,
) -> SynthIdentity:
    """Generate one identity: palette + smooth fields -> splats -> tokens.

    Points the profile's views cannot observe get corrupted tokens (colors
    blurred toward gray, opacity pushed down, splats inflated); observed
    points keep the clean encoding bit for bit.
    """
    n = template.n_points
    labels = make_labels(style_stream.child("palette"), profile.coverage_class)

    base_colors = np.stack([labels.region_color(r) for r in template.regions]) - 0.5
    dof = np.zeros((n, codec.token_dim - codec.tail_dim))
    color_field = smooth_field(template.points, style_stream.child("field/colors"), 24)
    dof[:, COLOR_SLICE] = np.clip(
        np.repeat(base_colors, 8, axis=0).reshape(n, 24) + 0.06 * color_field, -0.5, 0.5
    )
    dof[:, OFFSET_SLICE] = np.clip(
        0.8 * smooth_field(template.points, style_stream.child("field/offsets"), 24), -2.0, 2.0
    )
    dof[:, SCALE_SLICE] = np.clip(
        0.5 * smooth_field(template.points, style_stream.child("field/scales"), 8), -2.0, 2.0
    )
    dof[:, OPACITY_SLICE] = np.clip(
        0.1 * smooth_field(template.points, style_stream.child("field/opacity"), 1), -0.5, 0.5
    )

    tail = np.clip(
        0.25 * smooth_field(template.points, style_stream.child("field/tail"), codec.tail_dim),
        -2.0,
        2.0,
    )

    gt_splats = splats_from_dof(dof, template)

    corrupted = corruption_mask(template, profile.coverage_class)
    dof_out = dof.copy()
    dof_out[corrupted, COLOR_SLICE] = CORRUPT_COLOR_SHRINK * dof[corrupted, COLOR_SLICE]
    dof_out[corrupted, SCALE_SLICE] = dof[corrupted, SCALE_SLICE] + CORRUPT_SCALE_BUMP
    dof_out[corrupted, OPACITY_SLICE] = dof[corrupted, OPACITY_SLICE] - CORRUPT_OPACITY_DROP

    tokens_clean = codec.encode(dof, tail)
    tokens = tokens_clean.copy()
    if corrupted.any():
        tokens[corrupted] = codec.encode(dof_out[corrupted], tail[corrupted])

    return SynthIdentity(
        identity_id=identity_id,
        tokens=tokens,
        gt_splats=gt_splats,
        labels=labels,
        corrupted=corrupted,
        profile=profile,
    )
