"""Detokenizer: one GS token -> eight Gaussian splats, plus full renders."""

from __future__ import annotations

import numpy as np

from ..numerics import SeedStream, Tensor, adam_step, AdamState, backward, ops, zero_grads
from ..splatting import BodyPose, Camera, SkinnedRig, SplatBatch, lbs_transform, rasterize
from .encoding import (
    COLOR_SLICE,
    OFFSET_SLICE,
    OPACITY_SLICE,
    PARAM_DOF,
    SCALE_SLICE,
    SPLATS_PER_TOKEN,
    TokenCodec,
)
from .template import QueryPointSet

BASE_OPACITY_LOGIT = 0.6
OFFSET_BASE = 0.75      # octant anchor distance, in point radii
OFFSET_JITTER = 0.40    # jitter amplitude, in point radii
SCALE_BASE = 0.55       # base splat sigma, in point radii
SCALE_DELTA = 0.35      # log-scale units per dof unit
OPACITY_DELTA = 2.0     # logit units per dof unit

# Decode-side clamps: inactive on synthetic data (the generator stays in
# range) but keep wild generated tokens renderable.
_OFFSET_CLIP = 4.0
_SCALE_CLIP = 1.4
_OPACITY_CLIP = 12.0

_OCTANTS = np.array(
    [[sx, sy, sz] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)]
) / np.sqrt(3.0)


def splats_from_dof(dof: np.ndarray, template: QueryPointSet) -> SplatBatch:
    """Decode appearance vectors into 8 splats per query point."""
    n = len(dof)
    r0 = template.point_radius
    colors = np.clip(dof[:, COLOR_SLICE].reshape(n, SPLATS_PER_TOKEN, 3) + 0.5, 0.0, 1.0)
    jitter = np.clip(dof[:, OFFSET_SLICE].reshape(n, SPLATS_PER_TOKEN, 3), -_OFFSET_CLIP, _OFFSET_CLIP)
    offsets = r0 * (OFFSET_BASE * _OCTANTS[None] + OFFSET_JITTER * jitter)
    positions = template.points[:, None, :] + offsets
    log_scale = np.log(SCALE_BASE * r0) + np.clip(
        SCALE_DELTA * dof[:, SCALE_SLICE], -_SCALE_CLIP, _SCALE_CLIP
    )
    opacity = np.clip(
        BASE_OPACITY_LOGIT + OPACITY_DELTA * dof[:, OPACITY_SLICE], -_OPACITY_CLIP, _OPACITY_CLIP
    )
    s = n * SPLATS_PER_TOKEN
    quats = np.zeros((s, 4))
    quats[:, 0] = 1.0
    return SplatBatch(
        positions=positions.reshape(s, 3),
        log_scales=np.repeat(log_scale.reshape(s), 3).reshape(s, 3),
        rotations=quats,
        opacity_logits=np.repeat(opacity, SPLATS_PER_TOKEN, axis=0).reshape(s),
        colors=colors.reshape(s, 3),
    )


def dof_from_splats(splats: SplatBatch, template: QueryPointSet) -> np.ndarray:
    """Exact inverse of ``splats_from_dof`` for in-range splats."""
    n = template.n_points
    r0 = template.point_radius
    colors = splats.colors.reshape(n, SPLATS_PER_TOKEN, 3) - 0.5
    offsets = splats.positions.reshape(n, SPLATS_PER_TOKEN, 3) - template.points[:, None, :]
    jitter = (offsets / r0 - OFFSET_BASE * _OCTANTS[None]) / OFFSET_JITTER
    log_scale = splats.log_scales.reshape(n, SPLATS_PER_TOKEN, 3)[:, :, 0]
    scale_dof = (log_scale - np.log(SCALE_BASE * r0)) / SCALE_DELTA
    opacity = splats.opacity_logits.reshape(n, SPLATS_PER_TOKEN)[:, :1]
    opacity_dof = (opacity - BASE_OPACITY_LOGIT) / OPACITY_DELTA
    return np.concatenate(
        [colors.reshape(n, -1), jitter.reshape(n, -1), scale_dof, opacity_dof], axis=1
    )


class MlpDetokenizer:
    """Small trainable MLP predicting appearance vectors from tokens."""

    def __init__(self, token_dim: int, hidden: int = 128, seed: int = 0):
        stream = SeedStream(seed).child("detok")
        self.params = {
            "w1": Tensor(stream.normal((token_dim, hidden), scale=1.0 / np.sqrt(token_dim)), requires_grad=True),
            "b1": Tensor(np.zeros(hidden), requires_grad=True),
            "w2": Tensor(stream.normal((hidden, PARAM_DOF), scale=1.0 / np.sqrt(hidden)), requires_grad=True),
            "b2": Tensor(np.zeros(PARAM_DOF), requires_grad=True),
        }

    def predict(self, tokens) -> Tensor:
        h = ops.silu(ops.linear(ops.as_tensor(tokens) if not isinstance(tokens, Tensor) else tokens, self.params["w1"], self.params["b1"]))
        return ops.linear(h, self.params["w2"], self.params["b2"])

    def fit(self, tokens: np.ndarray, dof_target: np.ndarray, steps: int = 300, lr: float = 3e-3):
        state = AdamState.init(self.params)
        losses = []
        target = Tensor(dof_target)
        inputs = Tensor(tokens)
        for step in range(steps):
            zero_grads(self.params.values())
            loss = ops.l1_distance(self.predict(inputs), target)
            backward(loss)
            adam_step(self.params, state, lr)
            losses.append(loss.item())
        return losses


class Detokenizer:
    """Maps token sets to splat batches; analytic by default.

    Analytic mode inverts the synthetic token encoding exactly. MLP mode
    uses trained decoder parameters with the same output semantics.
    """

    def __init__(self, codec: TokenCodec, template: QueryPointSet, mlp: MlpDetokenizer | None = None):
        self.codec = codec
        self.template = template
        self.mlp = mlp

    def __call__(self, tokens: np.ndarray) -> SplatBatch:
        if tokens.ndim != 2 or tokens.shape[0] != self.template.n_points:
            raise ValueError(
                f"expected ({self.template.n_points}, {self.codec.token_dim}) tokens, got {tokens.shape}"
            )
        if tokens.shape[1] != self.codec.token_dim:
            raise ValueError(
                f"token width {tokens.shape[1]} does not match decoder width {self.codec.token_dim}"
            )
        if self.mlp is not None:
            from ..numerics import no_grad

            with no_grad():
                dof = self.mlp.predict(Tensor(np.asarray(tokens, dtype=np.float64))).data
        else:
            dof = self.codec.decode(np.asarray(tokens, dtype=np.float64))
        return splats_from_dof(dof, self.template)


def render_identity(
    tokens: np.ndarray,
    template: QueryPointSet,
    codec: TokenCodec,
    rig: SkinnedRig,
    pose: BodyPose,
    camera: Camera,
    detokenizer: Detokenizer | None = None,
):
    """detokenize -> skin -> rasterize; returns the RenderResult."""
    if tokens.shape[0] == 0:
        raise ValueError("cannot render an empty token set")
    detok = detokenizer if detokenizer is not None else Detokenizer(codec, template)
    splats = detok(tokens)
    posed = lbs_transform(splats, rig, pose, template.skin_weights, SPLATS_PER_TOKEN)
    return rasterize(posed, camera)
