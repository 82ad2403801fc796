"""Differentiable kernels used by the encoder.

Every kernel computes its forward value with numpy and, when a tape is
active and some input needs a gradient, records a closure mapping the
output gradient to input gradients.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import ShapeError
from .core import Tensor, record

log = logging.getLogger(__name__)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    out = Tensor(a.data @ b.data)

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return record(out, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; ``b`` may also be a bias over the last axis."""
    if a.shape == b.shape:
        bias = False
    elif b.data.ndim == 1 and a.data.ndim >= 1 and a.shape[-1] == b.shape[0]:
        bias = True
    else:
        raise ShapeError("add", a.shape, b.shape)
    out = Tensor(a.data + b.data)

    def backward(g):
        gb = g.reshape(-1, g.shape[-1]).sum(axis=0) if bias else g
        return g, gb

    return record(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError("mul", a.shape, b.shape)
    out = Tensor(a.data * b.data)

    def backward(g):
        return g * b.data, g * a.data

    return record(out, (a, b), backward)


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data * c)
    return record(out, (a,), lambda g: (g * c,))


def scalar_mul(w: Tensor, a: Tensor) -> Tensor:
    """Multiply ``a`` by a learnable scalar held in a shape-(1,) tensor."""
    if w.data.size != 1:
        raise ShapeError("scalar_mul", w.shape, a.shape)
    out = Tensor(a.data * w.data.reshape(()))

    def backward(g):
        return np.array([np.sum(g * a.data)]).reshape(w.shape), g * w.data.reshape(())

    return record(out, (w, a), backward)


def concat(tensors, axis=-1) -> Tensor:
    tensors = list(tensors)
    ref = tensors[0].shape
    ax = axis % len(ref)
    for t in tensors[1:]:
        if len(t.shape) != len(ref) or any(t.shape[k] != ref[k] for k in range(len(ref)) if k != ax):
            raise ShapeError("concat", ref, t.shape)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=ax))
    cuts = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, cuts, axis=ax))

    return record(out, tuple(tensors), backward)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError("transpose", a.shape)
    out = Tensor(a.data.T.copy())
    return record(out, (a,), lambda g: (g.T,))


def rows(a: Tensor, stop: int, start: int = 0) -> Tensor:
    if not 0 <= start <= stop <= a.shape[0]:
        raise ShapeError("rows", a.shape, (start, stop))
    out = Tensor(a.data[start:stop].copy())

    def backward(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return (full,)

    return record(out, (a,), backward)


def relu(a: Tensor) -> Tensor:
    on = a.data > 0
    out = Tensor(np.where(on, a.data, 0.0))
    return record(out, (a,), lambda g: (g * on,))


def logistic(a: Tensor) -> Tensor:
    x = a.data
    # split by sign so exp never overflows
    e = np.exp(-np.abs(x))
    y = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * y * (1.0 - y),))


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""
    z = a.data - a.data.max(axis=-1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=-1, keepdims=True)
    out = Tensor(p)

    def backward(g):
        return (p * (g - (g * p).sum(axis=-1, keepdims=True)),)

    return record(out, (a,), backward)


def masked_softmax(e: Tensor, m: Tensor) -> Tensor:
    """Rows of ``m * exp(e)`` normalized to sum to one.

    Rows whose mask sums to zero fall back to the plain softmax of ``e``.
    """
    if e.shape != m.shape or e.data.ndim != 2:
        raise ShapeError("masked_softmax", e.shape, m.shape)
    w = np.exp(e.data - e.data.max(axis=-1, keepdims=True))
    mw = m.data * w
    z = mw.sum(axis=-1, keepdims=True)
    dead = (z[:, 0] <= 0) | ~np.isfinite(z[:, 0])
    if dead.any():
        log.warning("soft mask is zero on %d row(s); using unmasked attention there", int(dead.sum()))
        z = np.where(dead[:, None], w.sum(axis=-1, keepdims=True), z)
        mw = np.where(dead[:, None], w, mw)
    alpha = mw / z
    out = Tensor(alpha)

    def backward(g):
        centered = g - (g * alpha).sum(axis=-1, keepdims=True)
        ge = alpha * centered
        gm = np.where(dead[:, None], 0.0, (w / z) * centered)
        return ge, gm

    return record(out, (e, m), backward)


def pair_dot(q: Tensor, s: Tensor) -> Tensor:
    """out[i, j] = q[i] . s[i, j] for q of shape (n, d) and s of shape (n, n, d)."""
    if q.data.ndim != 2 or s.data.ndim != 3 or s.shape[0] != q.shape[0] or s.shape[2] != q.shape[1]:
        raise ShapeError("pair_dot", q.shape, s.shape)
    out = Tensor(np.einsum("ik,ijk->ij", q.data, s.data))

    def backward(g):
        return np.einsum("ij,ijk->ik", g, s.data), g[:, :, None] * q.data[:, None, :]

    return record(out, (q, s), backward)


def embedding_lookup(table: Tensor, ids) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if table.data.ndim != 2 or ids.ndim != 1 or (ids.size and (ids.min() < 0 or ids.max() >= table.shape[0])):
        raise ShapeError("embedding_lookup", table.shape, ids.shape)
    out = Tensor(table.data[ids])

    def backward(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        return (full,)

    return record(out, (table,), backward)


def dropout(a: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout with a mask drawn from ``rng``; identity when disabled."""
    if rng is None or rate <= 0.0:
        return a
    keep = (rng.random(a.shape) >= rate) / (1.0 - rate)
    out = Tensor(a.data * keep)
    return record(out, (a,), lambda g: (g * keep,))


def log_softmax_np(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy(logits: Tensor, targets, reduction: str = "mean") -> Tensor:
    targets = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ShapeError("cross_entropy", logits.shape, targets.shape)
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise ShapeError("cross_entropy", logits.shape, (int(targets.max()),))
    lp = log_softmax_np(logits.data)
    picked = lp[np.arange(len(targets)), targets]
    k = 1.0 / len(targets) if reduction == "mean" else 1.0
    out = Tensor(-picked.sum() * k)

    def backward(g):
        grad = np.exp(lp)
        grad[np.arange(len(targets)), targets] -= 1.0
        return (grad * (g * k),)

    return record(out, (logits,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError("layer_norm", x.shape, gamma.shape, beta.shape)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv
    out = Tensor(xhat * gamma.data + beta.data)

    def backward(g):
        gh = g * gamma.data
        gx = inv * (gh - gh.mean(axis=-1, keepdims=True)
                    - xhat * (gh * xhat).mean(axis=-1, keepdims=True))
        flat = g.reshape(-1, d)
        return gx, (flat * xhat.reshape(-1, d)).sum(axis=0), flat.sum(axis=0)

    return record(out, (x, gamma, beta), backward)


def total(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum())
    return record(out, (a,), lambda g: (np.full(a.shape, float(g)),))
