"""Fused neural-network operations with hand-written gradients."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, DataError, NumericError, ShapeError
from .tensor import Tensor, _as_tensor, matmul

_GELU_C = math.sqrt(2.0 / math.pi)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Softmax with max-subtraction."""
    x = _as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return Tensor._result(y, (x,), back, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = _as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    y = z - lse
    p = np.exp(y)

    def back(g):
        return (g - p * g.sum(axis=axis, keepdims=True),)

    return Tensor._result(y, (x,), back, "log_softmax")


def gelu(x: Tensor) -> Tensor:
    """Tanh-approximated GELU."""
    x = _as_tensor(x)
    a = x.data
    inner = _GELU_C * (a + 0.044715 * a**3)
    t = np.tanh(inner)
    y = 0.5 * a * (1.0 + t)

    def back(g):
        dinner = _GELU_C * (1.0 + 3 * 0.044715 * a * a)
        return (g * (0.5 * (1.0 + t) + 0.5 * a * (1.0 - t * t) * dinner),)

    return Tensor._result(y, (x,), back, "gelu")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit (population) variance, then scale and shift."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm width mismatch: x {x.shape}, gain {gain.shape}, bias {bias.shape}")
    if eps <= 0:
        raise ConfigError(f"layer_norm eps must be positive, got {eps}")
    a = x.data
    mu = a.mean(axis=-1, keepdims=True)
    xc = a - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    y = xhat * gain.data + bias.data

    def back(g):
        dxhat = g * gain.data
        dx = inv * (
            dxhat - dxhat.mean(axis=-1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(g.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return Tensor._result(y, (x, gain, bias), back, "layer_norm")


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    y = matmul(x, weight)
    return y if bias is None else y + bias


def l2_normalize(x: Tensor, axis: int = -1) -> Tensor:
    """Scale rows to unit Euclidean norm; zero rows are an error, not a NaN."""
    x = _as_tensor(x)
    norms = np.sqrt((x.data * x.data).sum(axis=axis, keepdims=True))
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise NumericError("cannot normalize a zero-norm or non-finite vector")
    return x / (x * x).sum(axis=axis, keepdims=True).sqrt()


def split_heads(x: Tensor, heads: int) -> Tensor:
    *lead, s, d = x.shape
    return x.reshape(*lead, s, heads, d // heads).swapaxes(-2, -3)


def merge_heads(x: Tensor) -> Tensor:
    *lead, h, s, dh = x.shape
    return x.swapaxes(-2, -3).reshape(*lead, s, h * dh)


def scaled_dot_product_attention(q: Tensor, k: Tensor, v: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Attention over the second-to-last axis; ``mask`` is additive (0 or -inf)."""
    scale = 1.0 / math.sqrt(q.shape[-1])
    scores = matmul(q, k.swapaxes(-1, -2)) * scale
    if mask is not None:
        scores = scores + Tensor(mask)
    return matmul(softmax(scores, axis=-1), v)


def multi_head_attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    heads: int,
    w_q: Tensor,
    w_k: Tensor,
    w_v: Tensor,
    w_o: Tensor,
    b_q: Tensor | None = None,
    b_k: Tensor | None = None,
    b_v: Tensor | None = None,
    b_o: Tensor | None = None,
    mask: np.ndarray | None = None,
) -> Tensor:
    """Project q/k/v, attend per head with scale 1/sqrt(d/heads), concat, project out.

    Inputs are ``[..., s, d]``; all weight matrices are ``[d, d]``.
    """
    d = q.shape[-1]
    if heads <= 0 or d % heads:
        raise ConfigError(f"width {d} is not divisible by heads={heads}")
    qh = split_heads(linear(q, w_q, b_q), heads)
    kh = split_heads(linear(k, w_k, b_k), heads)
    vh = split_heads(linear(v, w_v, b_v), heads)
    out = merge_heads(scaled_dot_product_attention(qh, kh, vh, mask))
    return linear(out, w_o, b_o)


def causal_mask(s: int) -> np.ndarray:
    m = np.zeros((s, s))
    m[np.triu_indices(s, k=1)] = -np.inf
    return m


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of ``labels`` under ``softmax(logits)``."""
    logits = _as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"cross_entropy expects [B, C] logits and [B] labels, got {logits.shape} and {labels.shape}")
    n, c = logits.shape
    bad = np.flatnonzero((labels < 0) | (labels >= c))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"label {int(labels[i])} at index {i} is outside [0, {c})")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - lse
    rows = np.arange(n)
    loss = -logp[rows, labels].mean()

    def back(g):
        grad = np.exp(logp)
        grad[rows, labels] -= 1.0
        return (grad * (g / n),)

    return Tensor._result(np.asarray(loss), (logits,), back, "cross_entropy")


def cosine_logits(a: Tensor, b: Tensor, tau: "float | Tensor") -> Tensor:
    """``cos(a_i, b_j) / tau`` for rows of ``a`` [N, L] against rows of ``b`` [C, L]."""
    sims = matmul(l2_normalize(a), l2_normalize(b).swapaxes(-1, -2))
    return sims / tau


__all__ = [
    "softmax",
    "log_softmax",
    "gelu",
    "layer_norm",
    "linear",
    "l2_normalize",
    "multi_head_attention",
    "scaled_dot_product_attention",
    "causal_mask",
    "cross_entropy",
    "cosine_logits",
]
