"""Visibility-aware flow-matching generation of Gaussian-splat avatars.

Desk-scale pipeline: synthetic token datasets with partial observability,
contribution-based visibility masks, a KL-regularized token compressor, and
a masked rectified-flow transformer sampled with classifier-free guidance.
"""

__version__ = "0.1.0"
