"""Gaussian splat scenes: rig, skinning, cameras, differentiable rasterizer."""

from .camera import Camera, look_at
from .lbs import lbs_apply, lbs_transform
from .rasterize import (
    RenderResult,
    image_to_png_bytes,
    project_gaussians,
    project_splat,
    rasterize,
    write_png,
)
from .rig import (
    JOINT_NAMES,
    BodyPose,
    SkinnedRig,
    humanoid_rig,
    joint_world_transforms,
    quat_from_axis_angle,
    quat_multiply,
    quat_normalize,
    quat_to_matrix,
)
from .splats import SplatBatch, load_splats, save_splats

__all__ = [
    "Camera",
    "look_at",
    "SplatBatch",
    "save_splats",
    "load_splats",
    "BodyPose",
    "SkinnedRig",
    "humanoid_rig",
    "joint_world_transforms",
    "quat_normalize",
    "quat_multiply",
    "quat_from_axis_angle",
    "quat_to_matrix",
    "JOINT_NAMES",
    "lbs_transform",
    "lbs_apply",
    "rasterize",
    "project_splat",
    "project_gaussians",
    "RenderResult",
    "image_to_png_bytes",
    "write_png",
]
