"""Token contract: template query points, surrogate tokenizer, shards."""

from .detokenize import (
    BASE_OPACITY_LOGIT,
    Detokenizer,
    MlpDetokenizer,
    dof_from_splats,
    render_identity,
    splats_from_dof,
)
from .encoding import PARAM_DOF, SPLATS_PER_TOKEN, TokenCodec
from .identity import (
    COVERAGE_CLASSES,
    ObservabilityProfile,
    SynthIdentity,
    build_profile,
    corruption_mask,
    orbit_camera,
    synth_identity,
)
from .shards import LATENT_MAGIC, TOKEN_MAGIC, ShardRecord, read_shard, write_shard
from .template import FRONT_NORMAL_MIN, PELVIS_HEIGHT, QueryPointSet, make_template
from .wardrobe import (
    PALETTES,
    REGIONS,
    IdentityLabels,
    caption_for,
    make_labels,
    smooth_field,
)

__all__ = [
    "QueryPointSet",
    "make_template",
    "PELVIS_HEIGHT",
    "FRONT_NORMAL_MIN",
    "TokenCodec",
    "PARAM_DOF",
    "SPLATS_PER_TOKEN",
    "Detokenizer",
    "MlpDetokenizer",
    "splats_from_dof",
    "dof_from_splats",
    "render_identity",
    "BASE_OPACITY_LOGIT",
    "ObservabilityProfile",
    "SynthIdentity",
    "synth_identity",
    "build_profile",
    "corruption_mask",
    "orbit_camera",
    "COVERAGE_CLASSES",
    "IdentityLabels",
    "PALETTES",
    "REGIONS",
    "caption_for",
    "make_labels",
    "smooth_field",
    "ShardRecord",
    "read_shard",
    "write_shard",
    "TOKEN_MAGIC",
    "LATENT_MAGIC",
]
