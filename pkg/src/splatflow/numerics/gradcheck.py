"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward, zero_grads


def numeric_gradient(
    f: Callable[[], Tensor],
    tensor: Tensor,
    h: float = 1e-5,
    coords: Sequence[tuple] | None = None,
) -> dict[tuple, float]:
    """Central-difference d f / d tensor at selected coordinates.

    ``f`` must be a deterministic scalar function of the current tensor
    contents. ``coords`` defaults to every coordinate.
    """
    flat = tensor.data.reshape(-1)
    if coords is None:
        idx = [np.unravel_index(i, tensor.data.shape) for i in range(flat.size)]
    else:
        idx = list(coords)
    out: dict[tuple, float] = {}
    for c in idx:
        orig = tensor.data[c]
        tensor.data[c] = orig + h
        fp = f().item()
        tensor.data[c] = orig - h
        fm = f().item()
        tensor.data[c] = orig
        out[c] = (fp - fm) / (2.0 * h)
    return out


def max_relative_error(
    f: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = 1e-5,
    max_coords_per_tensor: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst relative error between analytic and numeric gradients.

    Relative error uses ``|a - n| / max(|a|, |n|, 1e-6)`` per coordinate.
    Optionally checks a random subset of coordinates per tensor (large
    weight matrices), drawn from ``rng``.
    """
    zero_grads(tensors)
    loss = f()
    backward(loss)
    worst = 0.0
    for t in tensors:
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        n_elem = t.data.size
        if max_coords_per_tensor is not None and n_elem > max_coords_per_tensor:
            gen = rng if rng is not None else np.random.default_rng(0)
            chosen = gen.choice(n_elem, size=max_coords_per_tensor, replace=False)
            coords = [np.unravel_index(int(i), t.data.shape) for i in np.sort(chosen)]
        else:
            coords = None
        numeric = numeric_gradient(f, t, h=h, coords=coords)
        for c, n_val in numeric.items():
            a_val = float(analytic[c])
            err = np.abs(a_val - n_val) / max(np.abs(a_val), np.abs(n_val), 1e-6)
            worst = max(worst, float(err))
    return worst
