"""Layer forward/backward primitives.

Every op is a pure function over float64 arrays; backward passes return
exact analytic gradients. Shapes allow arbitrary leading batch dimensions
unless noted.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


def _as_f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# Linear
# ---------------------------------------------------------------------------

def linear_forward(x, w, b):
    """y = x @ w + b. x: (..., d_in), w: (d_in, d_out), b: (d_out,)."""
    x, w, b = _as_f64(x), _as_f64(w), _as_f64(b)
    if x.shape[-1] != w.shape[0]:
        raise ValueError(f"linear shape mismatch: x {x.shape} vs w {w.shape}")
    if b.shape != (w.shape[1],):
        raise ValueError(f"linear bias shape {b.shape} does not match w {w.shape}")
    y = x @ w + b
    return y, (x, w)


def linear_backward(gy, cache):
    """Returns (gx, gw, gb)."""
    x, w = cache
    gy = _as_f64(gy)
    gx = gy @ w.T
    x2 = x.reshape(-1, x.shape[-1])
    g2 = gy.reshape(-1, gy.shape[-1])
    gw = x2.T @ g2
    gb = g2.sum(axis=0)
    return gx, gw, gb


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

def embedding_forward(ids, table):
    """Row lookup. ids: integer array, table: (vocab, d)."""
    ids = np.asarray(ids)
    table = _as_f64(table)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ValueError(
            f"embedding id out of range: ids span [{ids.min()}, {ids.max()}], "
            f"vocabulary size {table.shape[0]}"
        )
    return table[ids], (ids, table.shape)


def embedding_backward(gy, cache):
    """Scatter-adds gradients back to the looked-up rows."""
    ids, table_shape = cache
    gy = _as_f64(gy)
    gtable = np.zeros(table_shape, dtype=np.float64)
    np.add.at(gtable, ids.reshape(-1), gy.reshape(-1, table_shape[1]))
    return gtable


# ---------------------------------------------------------------------------
# Softmax / attention
# ---------------------------------------------------------------------------

def softmax(x, axis=-1):
    x = _as_f64(x)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    e = np.exp(x - m)
    s = e.sum(axis=axis, keepdims=True)
    return np.divide(e, s, out=np.zeros_like(e), where=s > 0)


def log_softmax(x, axis=-1):
    x = _as_f64(x)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    shifted = x - m
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def causal_mask(n: int) -> np.ndarray:
    """Boolean (n, n) mask where position i may attend to j <= i."""
    return np.tril(np.ones((n, n), dtype=bool))


def attention_forward(q, k, v, mask=None):
    """Scaled dot-product attention.

    q: (..., Tq, d), k: (..., Tk, d), v: (..., Tk, dv); mask is boolean
    (Tq, Tk), True where attention is allowed. Masked-out positions get a
    -inf bias before the softmax, so each attention row sums to 1 over the
    unmasked positions. A fully-masked row yields zeros and logs a warning.
    """
    q, k, v = _as_f64(q), _as_f64(k), _as_f64(v)
    if q.shape[-1] != k.shape[-1]:
        raise ValueError(f"attention feature dims differ: q {q.shape} vs k {k.shape}")
    if k.shape[-2] != v.shape[-2]:
        raise ValueError(f"attention key/value lengths differ: k {k.shape} vs v {v.shape}")
    scale = 1.0 / np.sqrt(q.shape[-1])
    scores = (q @ np.swapaxes(k, -1, -2)) * scale
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (q.shape[-2], k.shape[-2]):
            raise ValueError(
                f"mask shape {mask.shape} does not match (len_q, len_k) = "
                f"({q.shape[-2]}, {k.shape[-2]})"
            )
        scores = np.where(mask, scores, -np.inf)
        if not mask.any(axis=-1).all():
            logger.warning("attention mask has fully-masked rows; emitting zero rows")
    weights = softmax(scores, axis=-1)
    out = weights @ v
    return out, (q, k, v, weights, scale)


def attention_backward(gy, cache):
    """Returns (gq, gk, gv)."""
    q, k, v, weights, scale = cache
    gy = _as_f64(gy)
    gv = np.swapaxes(weights, -1, -2) @ gy
    gw = gy @ np.swapaxes(v, -1, -2)
    # softmax backward; masked entries have weight exactly 0 so they stay 0
    gscores = weights * (gw - (gw * weights).sum(axis=-1, keepdims=True))
    gq = (gscores @ k) * scale
    gk = (np.swapaxes(gscores, -1, -2) @ q) * scale
    return gq, gk, gv


# ---------------------------------------------------------------------------
# ReLU / layer norm
# ---------------------------------------------------------------------------

def relu_forward(x):
    x = _as_f64(x)
    return np.maximum(x, 0.0), (x > 0)


def relu_backward(gy, cache):
    return _as_f64(gy) * cache


def layer_norm_forward(x, gamma, beta, eps=1e-5):
    """Normalizes over the last axis. Optional layer; off by default in models."""
    x, gamma, beta = _as_f64(x), _as_f64(gamma), _as_f64(beta)
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return xhat * gamma + beta, (xhat, inv, gamma)


def layer_norm_backward(gy, cache):
    xhat, inv, gamma = cache
    gy = _as_f64(gy)
    d = xhat.shape[-1]
    ggamma = (gy * xhat).reshape(-1, d).sum(axis=0)
    gbeta = gy.reshape(-1, d).sum(axis=0)
    gxhat = gy * gamma
    gx = inv * (
        gxhat
        - gxhat.mean(axis=-1, keepdims=True)
        - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return gx, ggamma, gbeta


# ---------------------------------------------------------------------------
# Cross entropy
# ---------------------------------------------------------------------------

def softmax_cross_entropy(logits, targets, ignore_id=None):
    """Mean negative log-likelihood and its gradient on the logits.

    logits: (..., vocab); targets: integer array matching the leading
    shape. Positions whose target equals ignore_id contribute neither to
    the mean nor to the gradient.
    """
    logits = _as_f64(logits)
    targets = np.asarray(targets)
    if targets.shape != logits.shape[:-1]:
        raise ValueError(
            f"targets shape {targets.shape} does not match logits {logits.shape[:-1]}"
        )
    vocab = logits.shape[-1]
    flat_logits = logits.reshape(-1, vocab)
    flat_targets = targets.reshape(-1)
    if ignore_id is None:
        active = np.ones(flat_targets.shape, dtype=bool)
    else:
        active = flat_targets != ignore_id
    n_active = int(active.sum())
    if n_active == 0:
        raise ValueError("all positions ignored; mean cross-entropy undefined")
    check_targets = flat_targets[active]
    if check_targets.min() < 0 or check_targets.max() >= vocab:
        raise ValueError(
            f"target id out of range: [{check_targets.min()}, {check_targets.max()}] "
            f"vs vocabulary {vocab}"
        )
    logp = log_softmax(flat_logits, axis=-1)
    rows = np.arange(flat_targets.shape[0])
    nll = -logp[rows[active], check_targets]
    loss = float(nll.mean())

    grad = softmax(flat_logits, axis=-1)
    grad[rows[active], check_targets] -= 1.0
    grad[~active] = 0.0
    grad /= n_active
    return loss, grad.reshape(logits.shape)


# ---------------------------------------------------------------------------
# Sinusoidal embedding
# ---------------------------------------------------------------------------

def sinusoidal_embedding(value, dim: int, base: float = 10000.0) -> np.ndarray:
    """out[2i] = sin(value / base^(2i/dim)), out[2i+1] = cos(value / base^(2i/dim)).

    ``value`` may be a scalar or an array; output appends a trailing axis of
    length ``dim``.
    """
    if dim % 2 != 0:
        raise ValueError(f"embedding dim must be even, got {dim}")
    value = _as_f64(value)
    i = np.arange(dim // 2, dtype=np.float64)
    denom = base ** (2.0 * i / dim)
    angles = value[..., None] / denom
    out = np.empty(value.shape + (dim,), dtype=np.float64)
    out[..., 0::2] = np.sin(angles)
    out[..., 1::2] = np.cos(angles)
    return out


# ---------------------------------------------------------------------------
# Gated recurrent cell
# ---------------------------------------------------------------------------

def gru_cell_forward(x, h, wx, wh, bx, bh):
    """Single GRU step for one vector.

    x: (d_in,), h: (d_h,), wx: (d_in, 3*d_h), wh: (d_h, 3*d_h); gate order
    is reset, update, candidate.
    """
    x, h = _as_f64(x), _as_f64(h)
    d_h = h.shape[-1]
    a = x @ wx + bx
    c = h @ wh + bh
    a_r, a_z, a_n = a[..., :d_h], a[..., d_h : 2 * d_h], a[..., 2 * d_h :]
    c_r, c_z, c_n = c[..., :d_h], c[..., d_h : 2 * d_h], c[..., 2 * d_h :]
    r = _sigmoid(a_r + c_r)
    z = _sigmoid(a_z + c_z)
    n = np.tanh(a_n + r * c_n)
    h_new = (1.0 - z) * n + z * h
    return h_new, (x, h, r, z, n, c_n, wx, wh)


def gru_cell_backward(gh_new, cache):
    """Returns (gx, gh, gwx, gwh, gbx, gbh)."""
    x, h, r, z, n, c_n, wx, wh = cache
    g = _as_f64(gh_new)
    d_h = h.shape[-1]
    du_z = g * (h - n) * z * (1.0 - z)
    dn_pre = g * (1.0 - z) * (1.0 - n * n)
    du_r = dn_pre * c_n * r * (1.0 - r)
    da = np.concatenate([du_r, du_z, dn_pre], axis=-1)
    dc = np.concatenate([du_r, du_z, dn_pre * r], axis=-1)
    gx = da @ wx.T
    gh = dc @ wh.T + g * z
    gwx = np.outer(x, da) if x.ndim == 1 else x.reshape(-1, x.shape[-1]).T @ da.reshape(-1, 3 * d_h)
    gwh = np.outer(h, dc) if h.ndim == 1 else h.reshape(-1, h.shape[-1]).T @ dc.reshape(-1, 3 * d_h)
    gbx = da.reshape(-1, 3 * d_h).sum(axis=0)
    gbh = dc.reshape(-1, 3 * d_h).sum(axis=0)
    return gx, gh, gwx, gwh, gbx, gbh


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out
