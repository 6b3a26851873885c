"""Procedural appearance: palettes, captions, and smooth random fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import SeedStream

REGIONS = ["skin", "hair", "upper", "lower", "shoe"]
REGION_SKIN, REGION_HAIR, REGION_UPPER, REGION_LOWER, REGION_SHOE = range(5)

SKIN_PALETTE = [
    ("porcelain", (0.96, 0.84, 0.73)),
    ("fair", (0.92, 0.76, 0.63)),
    ("tan", (0.80, 0.60, 0.44)),
    ("bronze", (0.66, 0.45, 0.31)),
    ("brown", (0.48, 0.32, 0.22)),
    ("deep brown", (0.33, 0.22, 0.16)),
]
HAIR_PALETTE = [
    ("black", (0.08, 0.07, 0.07)),
    ("brown", (0.35, 0.22, 0.12)),
    ("chestnut", (0.45, 0.28, 0.15)),
    ("blonde", (0.85, 0.69, 0.40)),
    ("auburn", (0.54, 0.27, 0.14)),
    ("gray", (0.62, 0.62, 0.63)),
    ("copper", (0.65, 0.25, 0.12)),
    ("blue", (0.20, 0.30, 0.75)),
]
UPPER_PALETTE = [
    ("white", (0.93, 0.93, 0.92)),
    ("black", (0.10, 0.10, 0.11)),
    ("red", (0.78, 0.15, 0.16)),
    ("crimson", (0.62, 0.08, 0.14)),
    ("navy", (0.12, 0.16, 0.38)),
    ("sky blue", (0.45, 0.68, 0.88)),
    ("green", (0.15, 0.52, 0.25)),
    ("olive", (0.42, 0.45, 0.20)),
    ("yellow", (0.90, 0.80, 0.22)),
    ("orange", (0.90, 0.52, 0.16)),
    ("purple", (0.45, 0.20, 0.60)),
    ("pink", (0.92, 0.60, 0.72)),
]
LOWER_PALETTE = [
    ("black", (0.09, 0.09, 0.10)),
    ("navy", (0.13, 0.17, 0.36)),
    ("denim", (0.35, 0.45, 0.62)),
    ("gray", (0.55, 0.55, 0.57)),
    ("khaki", (0.76, 0.69, 0.50)),
    ("brown", (0.40, 0.28, 0.18)),
    ("white", (0.90, 0.90, 0.88)),
    ("forest", (0.16, 0.35, 0.20)),
]
SHOE_PALETTE = [
    ("black", (0.08, 0.08, 0.09)),
    ("white", (0.92, 0.92, 0.90)),
    ("brown", (0.38, 0.25, 0.15)),
    ("red", (0.70, 0.14, 0.14)),
    ("gray", (0.50, 0.50, 0.52)),
]

PALETTES = [SKIN_PALETTE, HAIR_PALETTE, UPPER_PALETTE, LOWER_PALETTE, SHOE_PALETTE]


@dataclass
class IdentityLabels:
    """Conditioning labels recorded with every synthetic identity."""

    palette_indices: tuple[int, int, int, int, int]  # region order: skin..shoe
    caption: str
    coverage_class: str

    def region_color(self, region: int) -> np.ndarray:
        return np.asarray(PALETTES[region][self.palette_indices[region]][1])


def draw_palette(stream: SeedStream) -> tuple[int, int, int, int, int]:
    return tuple(int(stream.integers(0, len(p))) for p in PALETTES)


def caption_for(indices) -> str:
    skin = SKIN_PALETTE[indices[0]][0]
    hair = HAIR_PALETTE[indices[1]][0]
    upper = UPPER_PALETTE[indices[2]][0]
    lower = LOWER_PALETTE[indices[3]][0]
    shoe = SHOE_PALETTE[indices[4]][0]
    return (
        f"a person with {hair} hair and {skin} skin wearing a {upper} top, "
        f"{lower} pants and {shoe} shoes"
    )


def make_labels(stream: SeedStream, coverage_class: str) -> IdentityLabels:
    idx = draw_palette(stream)
    return IdentityLabels(palette_indices=idx, caption=caption_for(idx), coverage_class=coverage_class)


def smooth_field(
    points: np.ndarray,
    stream: SeedStream,
    out_dim: int,
    n_terms: int = 6,
    freq_scale: float = 2.5,
) -> np.ndarray:
    """Smooth random Fourier field over 3D points, roughly unit variance.

    Identity appearance varies spatially but stays low-dimensional, which
    keeps the synthetic tokens compressible.
    """
    omegas = stream.normal((n_terms, 3), scale=freq_scale)
    phases = stream.uniform(0.0, 2.0 * np.pi, (n_terms, out_dim))
    coeffs = stream.normal((n_terms, out_dim), scale=np.sqrt(2.0 / n_terms))
    phase = points @ omegas.T  # (N, n_terms)
    return np.einsum("nmd,md->nd", np.cos(phase[:, :, None] + phases[None]), coeffs)
