"""Hold-ordering transformers.

Two architectures over hold-id tokens:

* :class:`ARTransformer` completes the concatenated original+sorted token
  sequence one token at a time behind a causal mask, with a positional
  embedding computed from hold coordinates instead of token positions.
* :class:`SimpleTransformer` drops the mask and the positional embedding
  entirely and emits the whole usage order in a single forward pass from
  the (padded) coordinate list.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from ..data import (
    PAD_COORD,
    OrderedHoldsExample,
    TokenizedPair,
    format_autoregressive_pair,
    pad_last_hold,
    pad_to_length,
)
from ..nn import (
    ParamStore,
    attention_backward,
    attention_forward,
    embedding_backward,
    embedding_forward,
    layer_norm_backward,
    layer_norm_forward,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
    sinusoidal_embedding,
    softmax_cross_entropy,
    uniform_init,
)
from ..nn.ops import causal_mask


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


class _BlockMixin:
    """Self-attention + feed-forward block shared by both transformers.

    Residual connections are always on; layer normalization is optional and
    off by default.
    """

    store: ParamStore
    n_heads: int
    use_layer_norm: bool

    def _init_block(self, rng: np.random.Generator, prefix: str, d: int, ff: int) -> None:
        add = self.store.add
        for name in ("wq", "wk", "wv", "wo"):
            add(f"{prefix}.{name}", uniform_init(rng, (d, d), d))
        for name in ("bq", "bk", "bv", "bo"):
            add(f"{prefix}.{name}", uniform_init(rng, (d,), d))
        add(f"{prefix}.w1", uniform_init(rng, (d, ff), d))
        add(f"{prefix}.b1", uniform_init(rng, (ff,), d))
        add(f"{prefix}.w2", uniform_init(rng, (ff, d), ff))
        add(f"{prefix}.b2", uniform_init(rng, (d,), ff))
        if self.use_layer_norm:
            add(f"{prefix}.ln1_g", np.ones(d))
            add(f"{prefix}.ln1_b", np.zeros(d))
            add(f"{prefix}.ln2_g", np.ones(d))
            add(f"{prefix}.ln2_b", np.zeros(d))

    def _block_forward(self, prefix: str, x: np.ndarray, mask):
        p = self.store.params
        q, qc = linear_forward(x, p[f"{prefix}.wq"], p[f"{prefix}.bq"])
        k, kc = linear_forward(x, p[f"{prefix}.wk"], p[f"{prefix}.bk"])
        v, vc = linear_forward(x, p[f"{prefix}.wv"], p[f"{prefix}.bv"])
        att, ac = attention_forward(
            _split_heads(q, self.n_heads),
            _split_heads(k, self.n_heads),
            _split_heads(v, self.n_heads),
            mask,
        )
        merged = _merge_heads(att)
        o, oc = linear_forward(merged, p[f"{prefix}.wo"], p[f"{prefix}.bo"])
        x1 = x + o
        if self.use_layer_norm:
            x1n, lc1 = layer_norm_forward(x1, p[f"{prefix}.ln1_g"], p[f"{prefix}.ln1_b"])
        else:
            x1n, lc1 = x1, None
        h, hc = linear_forward(x1n, p[f"{prefix}.w1"], p[f"{prefix}.b1"])
        hr, rc = relu_forward(h)
        f, fc = linear_forward(hr, p[f"{prefix}.w2"], p[f"{prefix}.b2"])
        x2 = x1n + f
        if self.use_layer_norm:
            out, lc2 = layer_norm_forward(x2, p[f"{prefix}.ln2_g"], p[f"{prefix}.ln2_b"])
        else:
            out, lc2 = x2, None
        return out, (qc, kc, vc, ac, oc, lc1, hc, rc, fc, lc2)

    def _block_backward(self, prefix: str, gout: np.ndarray, cache) -> np.ndarray:
        qc, kc, vc, ac, oc, lc1, hc, rc, fc, lc2 = cache
        acc = self.store.accumulate
        if self.use_layer_norm:
            gout, gg, gb = layer_norm_backward(gout, lc2)
            acc(f"{prefix}.ln2_g", gg)
            acc(f"{prefix}.ln2_b", gb)
        ghr, gw2, gb2 = linear_backward(gout, fc)
        acc(f"{prefix}.w2", gw2)
        acc(f"{prefix}.b2", gb2)
        gh = relu_backward(ghr, rc)
        gx1n, gw1, gb1 = linear_backward(gh, hc)
        acc(f"{prefix}.w1", gw1)
        acc(f"{prefix}.b1", gb1)
        gx1n = gx1n + gout  # residual around the feed-forward
        if self.use_layer_norm:
            gx1, gg, gb = layer_norm_backward(gx1n, lc1)
            acc(f"{prefix}.ln1_g", gg)
            acc(f"{prefix}.ln1_b", gb)
        else:
            gx1 = gx1n
        gmerged, gwo, gbo = linear_backward(gx1, oc)
        acc(f"{prefix}.wo", gwo)
        acc(f"{prefix}.bo", gbo)
        gq4, gk4, gv4 = attention_backward(_split_heads(gmerged, self.n_heads), ac)
        gq, gwq, gbq = linear_backward(_merge_heads(gq4), qc)
        gk, gwk, gbk = linear_backward(_merge_heads(gk4), kc)
        gv, gwv, gbv = linear_backward(_merge_heads(gv4), vc)
        acc(f"{prefix}.wq", gwq)
        acc(f"{prefix}.bq", gbq)
        acc(f"{prefix}.wk", gwk)
        acc(f"{prefix}.bk", gbk)
        acc(f"{prefix}.wv", gwv)
        acc(f"{prefix}.bv", gbv)
        return gq + gk + gv + gx1  # residual around attention


@dataclass
class ARTConfig:
    max_len: int = 17
    d_model: int = 128
    n_heads: int = 4
    n_blocks: int = 2
    ff_dim: int | None = None
    pos_scale: float = 100.0
    pos_base: float = 10000.0
    use_layer_norm: bool = False
    # "imaginary" pads with the pad token; "last_hold" repeats the final
    # real token instead (comparison experiment, off by default)
    pad_strategy: str = "imaginary"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d_model % 4 != 0:
            raise ValueError("d_model must be divisible by 4 (two even sinusoidal halves)")
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.pad_strategy not in ("imaginary", "last_hold"):
            raise ValueError(f"unknown pad_strategy {self.pad_strategy!r}")
        if self.ff_dim is None:
            self.ff_dim = 4 * self.d_model

    @property
    def pad_id(self) -> int:
        return self.max_len

    @property
    def vocab(self) -> int:
        return self.max_len + 1


class ARTransformer(_BlockMixin):
    """Autoregressive sequence-completion model over hold-id tokens.

    Every position's input vector is the token embedding plus a coordinate
    positional embedding: the sinusoidal embedding of x fills the first
    half of the model width and that of y the second half. A causal mask is
    applied in every attention layer.
    """

    kind = "art"

    def __init__(self, cfg: ARTConfig):
        self.cfg = cfg
        self.n_heads = cfg.n_heads
        self.use_layer_norm = cfg.use_layer_norm
        self.store = ParamStore()
        rng = np.random.default_rng(cfg.seed)
        self.store.add("tok_emb", uniform_init(rng, (cfg.vocab, cfg.d_model), cfg.d_model))
        for i in range(cfg.n_blocks):
            self._init_block(rng, f"blk{i}", cfg.d_model, cfg.ff_dim)
        self.store.add("head.w", uniform_init(rng, (cfg.d_model, cfg.vocab), cfg.d_model))
        self.store.add("head.b", uniform_init(rng, (cfg.vocab,), cfg.d_model))

    def _pos_embed(self, coords: np.ndarray) -> np.ndarray:
        half = self.cfg.d_model // 2
        return np.concatenate(
            [
                sinusoidal_embedding(coords[..., 0] * self.cfg.pos_scale, half, self.cfg.pos_base),
                sinusoidal_embedding(coords[..., 1] * self.cfg.pos_scale, half, self.cfg.pos_base),
            ],
            axis=-1,
        )

    def _forward(self, tokens: np.ndarray, coords: np.ndarray):
        tokens = np.asarray(tokens)
        coords = np.asarray(coords, dtype=np.float64)
        if tokens.shape != coords.shape[:-1] or coords.shape[-1] != 2:
            raise ValueError(
                f"coords {coords.shape} misaligned with tokens {tokens.shape}; "
                "expected one (x, y) per token"
            )
        emb, ec = embedding_forward(tokens, self.store.params["tok_emb"])
        x = emb + self._pos_embed(coords)
        mask = causal_mask(tokens.shape[-1])
        caches = []
        for i in range(self.cfg.n_blocks):
            x, cache = self._block_forward(f"blk{i}", x, mask)
            caches.append(cache)
        logits, hc = linear_forward(x, self.store.params["head.w"], self.store.params["head.b"])
        return logits, (ec, caches, hc)

    def forward(self, tokens: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Logits over token ids at every position; causal mask enforced."""
        squeeze = np.asarray(tokens).ndim == 1
        if squeeze:
            tokens = np.asarray(tokens)[None]
            coords = np.asarray(coords)[None]
        logits, _ = self._forward(tokens, coords)
        return logits[0] if squeeze else logits

    def _backward(self, dlogits: np.ndarray, cache) -> None:
        ec, caches, hc = cache
        gx, gw, gb = linear_backward(dlogits, hc)
        self.store.accumulate("head.w", gw)
        self.store.accumulate("head.b", gb)
        for i in reversed(range(self.cfg.n_blocks)):
            gx = self._block_backward(f"blk{i}", gx, caches[i])
        self.store.accumulate("tok_emb", embedding_backward(gx, ec))

    def loss_and_grads(self, inputs, targets, ignore_id=None) -> float:
        """Cross-entropy on all positions; fills the store's gradients."""
        tokens, coords = inputs
        self.store.zero_grads()
        logits, cache = self._forward(tokens, coords)
        loss, dlogits = softmax_cross_entropy(logits, targets, ignore_id)
        self._backward(dlogits, cache)
        return loss

    def loss_only(self, inputs, targets, ignore_id=None) -> float:
        tokens, coords = inputs
        logits, _ = self._forward(tokens, coords)
        loss, _ = softmax_cross_entropy(logits, targets, ignore_id)
        return loss

    def predictions(self, inputs) -> np.ndarray:
        tokens, coords = inputs
        logits, _ = self._forward(tokens, coords)
        return logits.argmax(axis=-1)

    def collate(self, examples: Sequence[OrderedHoldsExample]):
        """Pack examples into padded (tokens, coords) inputs and targets."""
        padded_len = 2 * self.cfg.max_len - 1
        pad = pad_to_length if self.cfg.pad_strategy == "imaginary" else pad_last_hold
        pairs = [
            pad(format_autoregressive_pair(ex, self.cfg.pad_id), padded_len)
            for ex in examples
        ]
        return self.collate_pairs(pairs)

    def collate_pairs(self, pairs: Sequence[TokenizedPair]):
        tokens = np.array([p.input_tokens for p in pairs], dtype=np.int64)
        coords = np.array([p.input_coords for p in pairs], dtype=np.float64)
        targets = np.array([p.output_tokens for p in pairs], dtype=np.int64)
        return (tokens, coords), targets

    def generate(
        self,
        holds: Sequence[tuple[float, float]],
        constrain_unused: bool = False,
        slot_init: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> list[int]:
        """Predict the usage order for a holds sequence.

        The sorted-segment slots start at arbitrary values (zeros, or
        ``slot_init`` token/coordinate arrays; the causal mask makes slot i
        independent of slots >= i) and are filled left to right by argmax,
        each prediction feeding the next step. Logits are restricted to the
        candidate ids {0..n-1} plus the pad token; ``constrain_unused``
        additionally removes already-used ids.
        """
        n = len(holds)
        if n < 2:
            raise ValueError(f"need at least 2 holds, got {n}")
        if n > self.cfg.max_len:
            raise ValueError(f"{n} holds exceeds max_len {self.cfg.max_len}")
        length = 2 * n - 1
        tokens = np.zeros(length, dtype=np.int64)
        tokens[:n] = np.arange(n)
        coords = np.zeros((length, 2), dtype=np.float64)
        coords[:n] = np.asarray(holds, dtype=np.float64)
        if slot_init is not None:
            init_tokens, init_coords = slot_init
            tokens[n:] = np.asarray(init_tokens)[: n - 1]
            coords[n:] = np.asarray(init_coords)[: n - 1]
        pad_id = self.cfg.pad_id

        valid = np.full(self.cfg.vocab, -np.inf)
        valid[:n] = 0.0
        valid[pad_id] = 0.0

        predicted: list[int] = []
        for k in range(n):
            logits = self.forward(tokens, coords)
            row = logits[n - 1 + k] + valid
            if constrain_unused:
                row = row.copy()
                for used in predicted:
                    if used != pad_id:
                        row[used] = -np.inf
            pred = int(np.argmax(row))
            predicted.append(pred)
            if k < n - 1:
                tokens[n + k] = pred
                coords[n + k] = holds[pred] if pred < n else PAD_COORD
        return predicted

    def config_dict(self) -> dict:
        return asdict(self.cfg)

    @classmethod
    def from_config(cls, cfg: dict) -> "ARTransformer":
        return cls(ARTConfig(**cfg))


@dataclass
class SimpleConfig:
    max_len: int = 17
    d_model: int = 128
    n_heads: int = 4
    n_blocks: int = 1
    ff_dim: int | None = None
    use_layer_norm: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.ff_dim is None:
            self.ff_dim = 4 * self.d_model

    @property
    def pad_id(self) -> int:
        return self.max_len

    @property
    def vocab(self) -> int:
        return self.max_len + 1


class SimpleTransformer(_BlockMixin):
    """Single-pass order predictor: no mask, no positional embedding.

    Position i's logits predict the token id of the i-th hold in usage
    order, directly from the fixed-length padded coordinate list.
    """

    kind = "simple"

    def __init__(self, cfg: SimpleConfig):
        self.cfg = cfg
        self.n_heads = cfg.n_heads
        self.use_layer_norm = cfg.use_layer_norm
        self.store = ParamStore()
        rng = np.random.default_rng(cfg.seed)
        self.store.add("in.w", uniform_init(rng, (2, cfg.d_model), 2))
        self.store.add("in.b", uniform_init(rng, (cfg.d_model,), 2))
        for i in range(cfg.n_blocks):
            self._init_block(rng, f"blk{i}", cfg.d_model, cfg.ff_dim)
        self.store.add("head.w", uniform_init(rng, (cfg.d_model, cfg.vocab), cfg.d_model))
        self.store.add("head.b", uniform_init(rng, (cfg.vocab,), cfg.d_model))

    def _forward(self, coords: np.ndarray):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape[-2] != self.cfg.max_len:
            raise ValueError(
                f"input length {coords.shape[-2]} != fixed length {self.cfg.max_len}"
            )
        x, ic = linear_forward(coords, self.store.params["in.w"], self.store.params["in.b"])
        caches = []
        for i in range(self.cfg.n_blocks):
            x, cache = self._block_forward(f"blk{i}", x, None)
            caches.append(cache)
        logits, hc = linear_forward(x, self.store.params["head.w"], self.store.params["head.b"])
        return logits, (ic, caches, hc)

    def forward(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.float64)
        squeeze = coords.ndim == 2
        if squeeze:
            coords = coords[None]
        logits, _ = self._forward(coords)
        return logits[0] if squeeze else logits

    def _backward(self, dlogits: np.ndarray, cache) -> None:
        ic, caches, hc = cache
        gx, gw, gb = linear_backward(dlogits, hc)
        self.store.accumulate("head.w", gw)
        self.store.accumulate("head.b", gb)
        for i in reversed(range(self.cfg.n_blocks)):
            gx = self._block_backward(f"blk{i}", gx, caches[i])
        _, gw, gb = linear_backward(gx, ic)
        self.store.accumulate("in.w", gw)
        self.store.accumulate("in.b", gb)

    def loss_and_grads(self, inputs, targets, ignore_id=None) -> float:
        (coords,) = inputs
        self.store.zero_grads()
        logits, cache = self._forward(coords)
        loss, dlogits = softmax_cross_entropy(logits, targets, ignore_id)
        self._backward(dlogits, cache)
        return loss

    def loss_only(self, inputs, targets, ignore_id=None) -> float:
        (coords,) = inputs
        logits, _ = self._forward(coords)
        loss, _ = softmax_cross_entropy(logits, targets, ignore_id)
        return loss

    def predictions(self, inputs) -> np.ndarray:
        (coords,) = inputs
        logits, _ = self._forward(coords)
        return logits.argmax(axis=-1)

    def collate(self, examples: Sequence[OrderedHoldsExample]):
        """Pad original coordinates and sorted-id targets to the fixed length."""
        max_len = self.cfg.max_len
        pad_id = self.cfg.pad_id
        coords = np.full((len(examples), max_len, 2), PAD_COORD[0], dtype=np.float64)
        targets = np.full((len(examples), max_len), pad_id, dtype=np.int64)
        for row, ex in enumerate(examples):
            if ex.n > max_len:
                raise ValueError(f"example with {ex.n} holds exceeds max_len {max_len}")
            coords[row, : ex.n] = ex.original
            targets[row, : ex.n] = ex.sorted_ids()
        return (coords,), targets

    def predict(self, holds: Sequence[tuple[float, float]]) -> list[int]:
        """Usage-order ids for the n holds, restricted to {0..n-1, pad}."""
        n = len(holds)
        if not 1 <= n <= self.cfg.max_len:
            raise ValueError(f"need 1..{self.cfg.max_len} holds, got {n}")
        coords = np.full((self.cfg.max_len, 2), PAD_COORD[0], dtype=np.float64)
        coords[:n] = np.asarray(holds, dtype=np.float64)
        logits = self.forward(coords)
        valid = np.full(self.cfg.vocab, -np.inf)
        valid[:n] = 0.0
        valid[self.cfg.pad_id] = 0.0
        return [int(np.argmax(logits[i] + valid)) for i in range(n)]

    def config_dict(self) -> dict:
        return asdict(self.cfg)

    @classmethod
    def from_config(cls, cfg: dict) -> "SimpleTransformer":
        return cls(SimpleConfig(**cfg))
