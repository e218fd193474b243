"""Holds-to-moves translation: recurrent encoder-decoder with attention.

The encoder GRU consumes the holds sentence; the decoder GRU emits one
move word at a time, attending over the encoder outputs with scaled dot
attention. Training uses teacher forcing; decoding is greedy.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from ..data import Vocab
from ..nn import (
    ParamStore,
    attention_backward,
    attention_forward,
    gru_cell_backward,
    gru_cell_forward,
    linear_backward,
    linear_forward,
    log_softmax,
    softmax_cross_entropy,
    uniform_init,
)


@dataclass
class Seq2SeqConfig:
    hidden: int = 512
    seed: int = 0


class Seq2Seq:
    kind = "seq2seq"

    def __init__(self, cfg: Seq2SeqConfig, in_vocab: Vocab, out_vocab: Vocab):
        self.cfg = cfg
        self.in_vocab = in_vocab
        self.out_vocab = out_vocab
        h = cfg.hidden
        self.store = ParamStore()
        rng = np.random.default_rng(cfg.seed)
        add = self.store.add
        add("enc_emb", uniform_init(rng, (len(in_vocab), h), h))
        add("enc_wx", uniform_init(rng, (h, 3 * h), h))
        add("enc_wh", uniform_init(rng, (h, 3 * h), h))
        add("enc_bx", uniform_init(rng, (3 * h,), h))
        add("enc_bh", uniform_init(rng, (3 * h,), h))
        add("dec_emb", uniform_init(rng, (len(out_vocab), h), h))
        add("dec_wx", uniform_init(rng, (h, 3 * h), h))
        add("dec_wh", uniform_init(rng, (h, 3 * h), h))
        add("dec_bx", uniform_init(rng, (3 * h,), h))
        add("dec_bh", uniform_init(rng, (3 * h,), h))
        add("comb_w", uniform_init(rng, (2 * h, h), 2 * h))
        add("comb_b", uniform_init(rng, (h,), 2 * h))
        add("out_w", uniform_init(rng, (h, len(out_vocab)), h))
        add("out_b", uniform_init(rng, (len(out_vocab),), h))

    # -- encoder ------------------------------------------------------------

    def _encode(self, src_ids: Sequence[int]):
        p = self.store.params
        h = np.zeros(self.cfg.hidden)
        outputs = []
        caches = []
        for s in src_ids:
            x = p["enc_emb"][s]
            h, cache = gru_cell_forward(x, h, p["enc_wx"], p["enc_wh"], p["enc_bx"], p["enc_bh"])
            caches.append((s, cache))
            outputs.append(h)
        enc_outs = np.stack(outputs) if outputs else np.zeros((0, self.cfg.hidden))
        return enc_outs, h, caches

    # -- decoder ------------------------------------------------------------

    def _decode_step(self, prev_id: int, h: np.ndarray, enc_outs: np.ndarray):
        p = self.store.params
        x = p["dec_emb"][prev_id]
        h_new, gru_cache = gru_cell_forward(
            x, h, p["dec_wx"], p["dec_wh"], p["dec_bx"], p["dec_bh"]
        )
        if enc_outs.shape[0]:
            ctx_row, att_cache = attention_forward(h_new[None, :], enc_outs, enc_outs)
            ctx = ctx_row[0]
        else:
            ctx, att_cache = np.zeros_like(h_new), None
        cat = np.concatenate([h_new, ctx])
        pre, c1 = linear_forward(cat, p["comb_w"], p["comb_b"])
        comb = np.tanh(pre)
        logits, c2 = linear_forward(comb, p["out_w"], p["out_b"])
        return logits, h_new, (prev_id, gru_cache, att_cache, c1, comb, c2)

    # -- training -----------------------------------------------------------

    def loss_and_grads(
        self,
        src_ids: Sequence[int],
        tgt_ids: Sequence[int],
        teacher_forcing: float = 1.0,
        rng: random.Random | None = None,
    ) -> tuple[float, list[int]]:
        """One sentence pair: mean NLL over target tokens (EOS included).

        Fills the store's gradients; returns (loss, decoder input ids used),
        the latter equal to the gold prefix whenever teacher forcing fires.
        """
        self.store.zero_grads()
        rng = rng or random.Random(0)
        eos = self.out_vocab.eos_id
        targets = list(tgt_ids) + [eos]
        n_steps = len(targets)

        enc_outs, h, enc_caches = self._encode(src_ids)

        used_inputs = []
        step_caches = []
        dlogits_per_step = []
        total = 0.0
        prev = self.out_vocab.sos_id
        for step in range(n_steps):
            used_inputs.append(prev)
            logits, h, cache = self._decode_step(prev, h, enc_outs)
            loss_t, dlogits = softmax_cross_entropy(logits, np.asarray(targets[step]))
            total += loss_t
            step_caches.append(cache)
            dlogits_per_step.append(dlogits)
            if step + 1 < n_steps:
                if rng.random() < teacher_forcing:
                    prev = targets[step]
                else:
                    prev = int(np.argmax(logits))
        loss = total / n_steps

        # Backward through the decoder, then the encoder.
        acc = self.store.accumulate
        grads = self.store.grads
        genc = np.zeros_like(enc_outs)
        gh = np.zeros(self.cfg.hidden)
        for step in reversed(range(n_steps)):
            prev_id, gru_cache, att_cache, c1, comb, c2 = step_caches[step]
            dlogits = dlogits_per_step[step] / n_steps
            gcomb, gow, gob = linear_backward(dlogits, c2)
            acc("out_w", gow)
            acc("out_b", gob)
            gpre = gcomb * (1.0 - comb * comb)
            gcat, gcw, gcb = linear_backward(gpre, c1)
            acc("comb_w", gcw)
            acc("comb_b", gcb)
            h_dim = self.cfg.hidden
            gh_step = gcat[:h_dim] + gh
            gctx = gcat[h_dim:]
            if att_cache is not None:
                gq, gk, gv = attention_backward(gctx[None, :], att_cache)
                genc += gk + gv
                gh_step = gh_step + gq[0]
            gx, gh, gwx, gwh, gbx, gbh = gru_cell_backward(gh_step, gru_cache)
            acc("dec_wx", gwx)
            acc("dec_wh", gwh)
            acc("dec_bx", gbx)
            acc("dec_bh", gbh)
            grads["dec_emb"][prev_id] += gx

        gh_carry = gh  # decoder initial hidden was the encoder final state
        for t in reversed(range(len(enc_caches))):
            s, cache = enc_caches[t]
            gh_total = gh_carry + genc[t]
            gx, gh_carry, gwx, gwh, gbx, gbh = gru_cell_backward(gh_total, cache)
            acc("enc_wx", gwx)
            acc("enc_wh", gwh)
            acc("enc_bx", gbx)
            acc("enc_bh", gbh)
            grads["enc_emb"][s] += gx

        return loss, used_inputs

    # -- inference ----------------------------------------------------------

    def translate(self, src_words: Sequence[str]) -> list[str]:
        """Greedy decode from SOS until EOS or 2x the input length.

        Unknown input words map to UNK; specials are masked out of the
        argmax so every emitted word is a content word.
        """
        src_ids = self.in_vocab.encode(src_words)
        enc_outs, h, _ = self._encode(src_ids)
        max_steps = 2 * len(src_ids)
        banned = [self.out_vocab.sos_id, self.out_vocab.unk_id]
        out_words = []
        prev = self.out_vocab.sos_id
        for _ in range(max_steps):
            logits, h, _ = self._decode_step(prev, h, enc_outs)
            masked = logits.copy()
            masked[banned] = -np.inf
            prev = int(np.argmax(masked))
            if prev == self.out_vocab.eos_id:
                break
            out_words.append(self.out_vocab.id_to_word[prev])
        return out_words

    def sentence_log_probs(self, src_words: Sequence[str], tgt_words: Sequence[str]) -> list[float]:
        """Teacher-forced log p(target token) for each step, EOS included."""
        src_ids = self.in_vocab.encode(src_words)
        tgt_ids = self.out_vocab.encode(tgt_words)
        targets = tgt_ids + [self.out_vocab.eos_id]
        enc_outs, h, _ = self._encode(src_ids)
        prev = self.out_vocab.sos_id
        log_probs = []
        for target in targets:
            logits, h, _ = self._decode_step(prev, h, enc_outs)
            log_probs.append(float(log_softmax(logits)[target]))
            prev = target
        return log_probs

    def config_dict(self) -> dict:
        return asdict(self.cfg)


def perplexity_from_probs(probs: Sequence[float]) -> float:
    """exp of the mean negative log probability; +inf on a zero probability."""
    if not probs:
        raise ValueError("need at least one probability")
    total = 0.0
    for p in probs:
        if p <= 0.0:
            return math.inf
        total += math.log(p)
    return math.exp(-total / len(probs))


def perplexity(model: Seq2Seq, corpus: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Corpus perplexity: exp of mean per-token NLL under teacher forcing."""
    if not corpus:
        raise ValueError("corpus must be nonempty")
    log_probs = []
    for src, tgt in corpus:
        log_probs.extend(model.sentence_log_probs(src, tgt))
    mean_nll = -sum(log_probs) / len(log_probs)
    return math.exp(mean_nll) if math.isfinite(mean_nll) else math.inf


def seq2seq_train(
    model: Seq2Seq,
    corpus: Sequence[tuple[Sequence[str], Sequence[str]]],
    cfg,
    val_corpus: Sequence[tuple[Sequence[str], Sequence[str]]] | None = None,
) -> list[dict]:
    """Per-sentence Adam training with teacher forcing.

    Records the per-epoch mean training loss and, at eval intervals, the
    validation perplexity. Aborts on a non-finite loss.
    """
    from .training import TrainingDiverged
    from ..nn import adam_step

    rng = random.Random(cfg.seed)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        losses = []
        for src_words, tgt_words in corpus:
            src_ids = model.in_vocab.encode(src_words)
            tgt_ids = model.out_vocab.encode(tgt_words)
            loss, _ = model.loss_and_grads(
                src_ids, tgt_ids, teacher_forcing=cfg.teacher_forcing, rng=rng
            )
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss {loss} at epoch {epoch}")
            adam_step(model.store, lr=cfg.lr)
            losses.append(loss)
        row = {"epoch": epoch, "train_loss": sum(losses) / len(losses)}
        if val_corpus and (epoch % cfg.eval_interval == 0 or epoch == cfg.epochs):
            row["val_ppl"] = perplexity(model, val_corpus)
        history.append(row)
    return history
