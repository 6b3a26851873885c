"""Token visibility masks and their brute-force oracle."""

from .mask import (
    K_MIN_DEFAULT,
    REL_TAU_FACTOR,
    compute_token_mask,
    on_screen,
    splat_visibility,
    token_mask,
    view_contributions,
    view_threshold,
)
from .oracle import oracle_contributions, oracle_mask

__all__ = [
    "splat_visibility",
    "token_mask",
    "compute_token_mask",
    "view_contributions",
    "view_threshold",
    "on_screen",
    "oracle_mask",
    "oracle_contributions",
    "K_MIN_DEFAULT",
    "REL_TAU_FACTOR",
]
