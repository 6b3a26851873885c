"""Gaussian splat batches and the binary scene dump format."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np


@dataclass
class SplatBatch:
    """A batch of anisotropic Gaussian splats.

    Fields are (S, ...) arrays; the rasterizer also accepts autodiff
    tensors in any field. Rotations are quaternions in (w, x, y, z) order,
    normalized on use. Colors live in [0, 1].
    """

    positions: np.ndarray      # (S, 3)
    log_scales: np.ndarray     # (S, 3)
    rotations: np.ndarray      # (S, 4)
    opacity_logits: np.ndarray  # (S,)
    colors: np.ndarray         # (S, 3)

    def __len__(self) -> int:
        return int(np.shape(self.positions)[0])

    def copy(self) -> "SplatBatch":
        return SplatBatch(
            self.positions.copy(),
            self.log_scales.copy(),
            self.rotations.copy(),
            self.opacity_logits.copy(),
            self.colors.copy(),
        )

    @classmethod
    def empty(cls) -> "SplatBatch":
        return cls(
            np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 4)), np.zeros((0,)), np.zeros((0, 3))
        )

    def take(self, idx: np.ndarray) -> "SplatBatch":
        return SplatBatch(
            self.positions[idx],
            self.log_scales[idx],
            self.rotations[idx],
            self.opacity_logits[idx],
            self.colors[idx],
        )


def save_splats(path, splats: SplatBatch) -> None:
    """Write the little-endian record stream: u32 count, then 14 f32 per splat."""
    s = len(splats)
    rec = np.concatenate(
        [
            np.asarray(splats.positions, dtype=np.float64).reshape(s, 3),
            np.asarray(splats.log_scales, dtype=np.float64).reshape(s, 3),
            np.asarray(splats.rotations, dtype=np.float64).reshape(s, 4),
            np.asarray(splats.opacity_logits, dtype=np.float64).reshape(s, 1),
            np.asarray(splats.colors, dtype=np.float64).reshape(s, 3),
        ],
        axis=1,
    ).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", s))
        fh.write(rec.tobytes())


def load_splats(path) -> SplatBatch:
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<I", fh.read(4))
        rec = np.frombuffer(fh.read(count * 14 * 4), dtype="<f4").reshape(count, 14)
    rec = rec.astype(np.float64)
    return SplatBatch(
        positions=rec[:, 0:3].copy(),
        log_scales=rec[:, 3:6].copy(),
        rotations=rec[:, 6:10].copy(),
        opacity_logits=rec[:, 10].copy(),
        colors=rec[:, 11:14].copy(),
    )
