"""Invertible token codec: per-point appearance vector <-> GS token.

Tokens are the appearance degrees of freedom padded with a structured
tail and rotated by a fixed orthogonal map, so a ground-truth oracle
exists for detokenizer training and round-trip tests.
"""

from __future__ import annotations

import numpy as np

from ..numerics import SeedStream

SPLATS_PER_TOKEN = 8
COLOR_DOF = SPLATS_PER_TOKEN * 3      # per-splat RGB, centered on 0.5
OFFSET_DOF = SPLATS_PER_TOKEN * 3     # per-splat offset jitter
SCALE_DOF = SPLATS_PER_TOKEN          # per-splat isotropic log-scale delta
OPACITY_DOF = 1                       # per-token opacity logit delta
PARAM_DOF = COLOR_DOF + OFFSET_DOF + SCALE_DOF + OPACITY_DOF  # 57

COLOR_SLICE = slice(0, COLOR_DOF)
OFFSET_SLICE = slice(COLOR_DOF, COLOR_DOF + OFFSET_DOF)
SCALE_SLICE = slice(COLOR_DOF + OFFSET_DOF, COLOR_DOF + OFFSET_DOF + SCALE_DOF)
OPACITY_SLICE = slice(PARAM_DOF - 1, PARAM_DOF)


class TokenCodec:
    """Fixed orthogonal map between appearance vectors and tokens."""

    def __init__(self, token_dim: int, seed: int):
        if token_dim < PARAM_DOF:
            raise ValueError(f"token_dim must be >= {PARAM_DOF}, got {token_dim}")
        self.token_dim = token_dim
        self.seed = seed
        raw = SeedStream(seed).child("codec").normal((token_dim, token_dim))
        q, r = np.linalg.qr(raw)
        self.basis = q * np.sign(np.diag(r))  # sign fix makes the QR unique

    @property
    def tail_dim(self) -> int:
        return self.token_dim - PARAM_DOF

    def encode(self, dof: np.ndarray, tail: np.ndarray) -> np.ndarray:
        """(N, PARAM_DOF) appearance + (N, tail) structured noise -> tokens."""
        v = np.concatenate([dof, tail], axis=1)
        return v @ self.basis

    def decode(self, tokens: np.ndarray) -> np.ndarray:
        """Tokens -> (N, PARAM_DOF) appearance vectors (tail discarded)."""
        return (tokens @ self.basis.T)[:, :PARAM_DOF]
