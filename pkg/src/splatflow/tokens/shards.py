"""Binary dataset shards: magic "GLCA", tokens, mask bitsets, labels."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .identity import COVERAGE_CLASSES
from .wardrobe import IdentityLabels

TOKEN_MAGIC = b"GLCA"
LATENT_MAGIC = b"GLCZ"
SHARD_VERSION = 1


@dataclass
class ShardRecord:
    identity_id: str
    matrix: np.ndarray        # (N, D) float32 rows, one per query point
    mask: np.ndarray          # (N,) bool visibility bits
    labels: IdentityLabels


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _read_str(fh) -> str:
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def write_shard(path, records: list[ShardRecord], n_points: int, dim: int, magic: bytes = TOKEN_MAGIC) -> None:
    """Write a shard; mask bitsets are LSB-first, padded to byte boundary."""
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<IIII", SHARD_VERSION, n_points, dim, len(records)))
        for rec in records:
            matrix = np.ascontiguousarray(rec.matrix, dtype="<f4")
            if matrix.shape != (n_points, dim):
                raise ValueError(f"record {rec.identity_id}: matrix shape {matrix.shape} != ({n_points}, {dim})")
            mask = np.asarray(rec.mask, dtype=bool)
            if mask.shape != (n_points,):
                raise ValueError(f"record {rec.identity_id}: mask length {mask.shape} != {n_points}")
            fh.write(_pack_str(rec.identity_id))
            fh.write(matrix.tobytes())
            fh.write(np.packbits(mask, bitorder="little").tobytes())
            fh.write(struct.pack("<B", COVERAGE_CLASSES.index(rec.labels.coverage_class)))
            fh.write(struct.pack("<5H", *rec.labels.palette_indices))
            fh.write(_pack_str(rec.labels.caption))


def read_shard(path, magic: bytes = TOKEN_MAGIC) -> tuple[int, int, list[ShardRecord]]:
    """Read a shard back; returns (n_points, dim, records)."""
    with open(path, "rb") as fh:
        got = fh.read(4)
        if got != magic:
            raise ValueError(f"bad shard magic {got!r}, expected {magic!r}")
        version, n_points, dim, count = struct.unpack("<IIII", fh.read(16))
        if version != SHARD_VERSION:
            raise ValueError(f"unsupported shard version {version}")
        mask_bytes = (n_points + 7) // 8
        records = []
        for _ in range(count):
            identity_id = _read_str(fh)
            matrix = np.frombuffer(fh.read(n_points * dim * 4), dtype="<f4").reshape(n_points, dim)
            mask = np.unpackbits(
                np.frombuffer(fh.read(mask_bytes), dtype=np.uint8), count=n_points, bitorder="little"
            ).astype(bool)
            (coverage_idx,) = struct.unpack("<B", fh.read(1))
            palette = struct.unpack("<5H", fh.read(10))
            caption = _read_str(fh)
            records.append(
                ShardRecord(
                    identity_id=identity_id,
                    matrix=matrix.copy(),
                    mask=mask,
                    labels=IdentityLabels(
                        palette_indices=tuple(int(p) for p in palette),
                        caption=caption,
                        coverage_class=COVERAGE_CLASSES[coverage_idx],
                    ),
                )
            )
    return n_points, dim, records
