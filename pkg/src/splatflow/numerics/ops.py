"""Differentiable operation library for the autodiff engine.

Primitives carry hand-written VJPs; everything else (losses, attention,
norm variants used rarely) is composed from them. Elementwise primitives
follow numpy broadcasting, with gradients reduced back to operand shapes.
"""

from __future__ import annotations

import builtins

import numpy as np

from .tensor import ShapeError, Tensor, as_tensor, make_result

_sum = builtins.sum


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _elementwise(name, a, b, fwd, vjp_a, vjp_b):
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = fwd(a.data, b.data)
    except ValueError:
        raise ShapeError(f"{name}: shapes {a.shape} and {b.shape} do not broadcast")

    def vjp(g):
        ga = _unbroadcast(vjp_a(g, a.data, b.data), a.data.shape)
        gb = _unbroadcast(vjp_b(g, a.data, b.data), b.data.shape)
        return ga, gb

    return make_result(out, (a, b), vjp, name)


def add(a, b):
    return _elementwise("add", a, b, lambda x, y: x + y, lambda g, x, y: g, lambda g, x, y: g)


def sub(a, b):
    return _elementwise("sub", a, b, lambda x, y: x - y, lambda g, x, y: g, lambda g, x, y: -g)


def mul(a, b):
    return _elementwise("mul", a, b, lambda x, y: x * y, lambda g, x, y: g * y, lambda g, x, y: g * x)


def div(a, b):
    return _elementwise(
        "div", a, b, lambda x, y: x / y, lambda g, x, y: g / y, lambda g, x, y: -g * x / (y * y)
    )


def maximum(a, b):
    def va(g, x, y):
        return g * (x >= y)

    def vb(g, x, y):
        return g * (x < y)

    return _elementwise("maximum", a, b, np.maximum, va, vb)


def minimum(a, b):
    def va(g, x, y):
        return g * (x <= y)

    def vb(g, x, y):
        return g * (x > y)

    return _elementwise("minimum", a, b, np.minimum, va, vb)


def neg(a):
    a = as_tensor(a)
    return make_result(-a.data, (a,), lambda g: (-g,), "neg")


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return make_result(out, (a,), lambda g: (g * out,), "exp")


def log(a):
    a = as_tensor(a)
    return make_result(np.log(a.data), (a,), lambda g: (g / a.data,), "log")


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return make_result(out, (a,), lambda g: (g / (2.0 * out),), "sqrt")


def abs(a):
    a = as_tensor(a)
    return make_result(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),), "abs")


def pow(a, p: float):
    a = as_tensor(a)
    p = float(p)
    out = a.data**p
    return make_result(out, (a,), lambda g: (g * p * a.data ** (p - 1.0),), "pow")


def sigmoid(a):
    a = as_tensor(a)
    out = np.empty_like(a.data)
    pos = a.data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
    ex = np.exp(a.data[~pos])
    out[~pos] = ex / (1.0 + ex)
    return make_result(out, (a,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def silu(a):
    """x * sigmoid(x)."""
    a = as_tensor(a)
    s = 1.0 / (1.0 + np.exp(-np.clip(a.data, -60.0, 60.0)))
    out = a.data * s

    def vjp(g):
        return (g * (s + a.data * s * (1.0 - s)),)

    return make_result(out, (a,), vjp, "silu")


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 0 or b.ndim == 0 or a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    out = np.matmul(a.data, b.data)

    if a.ndim >= 2 and b.ndim >= 2:

        def vjp(g):
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    elif a.ndim == 1 and b.ndim >= 2:

        def vjp(g):
            ga = np.matmul(b.data, g[..., :, None])[..., 0]
            gb = a.data[:, None] * g[..., None, :]
            return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    elif a.ndim >= 2 and b.ndim == 1:

        def vjp(g):
            ga = g[..., :, None] * b.data[None, :]
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g[..., :, None])[..., 0]
            return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    else:  # 1-D @ 1-D inner product
        def vjp(g):
            return g * b.data, g * a.data

    return make_result(out, (a, b), vjp, "matmul")


def reshape(a, shape):
    a = as_tensor(a)
    out = a.data.reshape(shape)
    src = a.data.shape
    return make_result(out, (a,), lambda g: (g.reshape(src),), "reshape")


def transpose(a, axes=None):
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return make_result(a.data.transpose(axes), (a,), lambda g: (g.transpose(inv),), "transpose")


def sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)
    shape = a.data.shape

    def vjp(g):
        if axis is None:
            return (np.full(shape, g),)
        gx = g
        if not keepdims:
            gx = np.expand_dims(gx, axis)
        return (np.broadcast_to(gx, shape),)

    return make_result(out, (a,), vjp, "sum")


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    shape = a.data.shape
    count = a.data.size if axis is None else np.prod([shape[i] for i in np.atleast_1d(axis)])

    def vjp(g):
        if axis is None:
            return (np.full(shape, g / count),)
        gx = g
        if not keepdims:
            gx = np.expand_dims(gx, axis)
        return (np.broadcast_to(gx, shape) / count,)

    return make_result(out, (a,), vjp, "mean")


def cumsum(a, axis: int):
    a = as_tensor(a)
    out = np.cumsum(a.data, axis=axis)

    def vjp(g):
        return (np.flip(np.cumsum(np.flip(g, axis=axis), axis=axis), axis=axis),)

    return make_result(out, (a,), vjp, "cumsum")


def take(a, indices, axis: int = 0):
    """Gather rows along an axis with integer indices (constant)."""
    a = as_tensor(a)
    idx = np.asarray(indices)
    out = np.take(a.data, idx, axis=axis)
    shape = a.data.shape

    def vjp(g):
        ga = np.zeros(shape, dtype=g.dtype)
        moved = np.moveaxis(ga, axis, 0)
        np.add.at(moved, idx, np.moveaxis(g, axis, 0))
        return (ga,)

    return make_result(out, (a,), vjp, "take")


def index(a, idx):
    """Basic (slice/int) indexing; no boolean or repeated fancy indices."""
    a = as_tensor(a)
    out = a.data[idx]
    shape = a.data.shape

    def vjp(g):
        ga = np.zeros(shape, dtype=g.dtype)
        ga[idx] = g
        return (ga,)

    return make_result(out, (a,), vjp, "index")


def concat(tensors, axis: int = 0):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return make_result(out, tuple(tensors), vjp, "concat")


def where(cond, a, b):
    """Select elementwise by a constant boolean mask; chosen side keeps its bits."""
    cond = np.asarray(cond, dtype=bool)
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = np.where(cond, a.data, b.data)
    except ValueError:
        raise ShapeError(f"where: shapes {cond.shape}, {a.shape}, {b.shape} do not broadcast")

    def vjp(g):
        ga = _unbroadcast(np.where(cond, g, 0.0), a.data.shape)
        gb = _unbroadcast(np.where(cond, 0.0, g), b.data.shape)
        return ga, gb

    return make_result(out, (a, b), vjp, "where")


def softmax(a, axis: int = -1):
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((g - dot) * out,)

    return make_result(out, (a,), vjp, "softmax")


def layer_norm(x, gamma, beta, eps: float = 1e-5):
    """LayerNorm over the last axis with learnable scale and shift."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = gamma.data * xhat + beta.data

    def vjp(g):
        gg = g * gamma.data
        gx = inv * (gg - gg.mean(axis=-1, keepdims=True) - xhat * (gg * xhat).mean(axis=-1, keepdims=True))
        reduce_axes = tuple(range(g.ndim - 1))
        ggamma = (g * xhat).sum(axis=reduce_axes) if reduce_axes else g * xhat
        gbeta = g.sum(axis=reduce_axes) if reduce_axes else g
        return gx, ggamma.reshape(gamma.data.shape), gbeta.reshape(beta.data.shape)

    return make_result(out, (x, gamma, beta), vjp, "layer_norm")


def rms_norm(x, gamma, eps: float = 1e-6):
    """RMS normalization over the last axis with learnable scale."""
    x, gamma = as_tensor(x), as_tensor(gamma)
    ms = (x.data * x.data).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(ms + eps)
    xhat = x.data * inv
    out = gamma.data * xhat

    def vjp(g):
        gg = g * gamma.data
        gx = inv * (gg - xhat * (gg * xhat).mean(axis=-1, keepdims=True))
        reduce_axes = tuple(range(g.ndim - 1))
        ggamma = (g * xhat).sum(axis=reduce_axes) if reduce_axes else g * xhat
        return gx, ggamma.reshape(gamma.data.shape)

    return make_result(out, (x, gamma), vjp, "rms_norm")


def l1_distance(a, b):
    """Mean absolute difference between two equally shaped tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"l1_distance: shapes {a.shape} and {b.shape} differ")
    return mean(abs(sub(a, b)))


def linear(x, w, b=None):
    """x @ w (+ b). w has shape (in, out)."""
    out = matmul(x, w)
    if b is not None:
        out = add(out, b)
    return out


def attention(q, k, v, n_heads: int):
    """Materialized multi-head attention over (..., L, C) streams."""
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    c = q.shape[-1]
    if c % n_heads:
        raise ShapeError(f"attention: channels {c} not divisible by {n_heads} heads")
    dh = c // n_heads

    def split_heads(t):
        lead = t.shape[:-2]
        t = reshape(t, lead + (t.shape[-2], n_heads, dh))
        axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
        return transpose(t, axes)

    qh, kh, vh = split_heads(q), split_heads(k), split_heads(v)
    scores = mul(matmul(qh, transpose(kh, tuple(range(kh.ndim - 2)) + (kh.ndim - 1, kh.ndim - 2))), 1.0 / np.sqrt(dh))
    attn = softmax(scores, axis=-1)
    outh = matmul(attn, vh)
    lead = q.shape[:-2]
    axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    out = transpose(outh, axes)
    return reshape(out, lead + (q.shape[-2], c))
