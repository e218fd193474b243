import math
import random

import numpy as np
import pytest

from betaboard.data import OrderedHoldsExample, Vocab, example_from_holds, permute_augment
from betaboard.models import (
    ARTConfig,
    ARTransformer,
    Seq2Seq,
    Seq2SeqConfig,
    SimpleConfig,
    SimpleTransformer,
    TrainConfig,
    perplexity,
    perplexity_from_probs,
    seq2seq_train,
    token_accuracy,
    train_loop,
)
from betaboard.models.training import history_to_csv
from betaboard.nn import grad_check, load_checkpoint


def random_example(n, base_id=0, seed=0):
    rng = random.Random(seed)
    holds = [(rng.random(), rng.random()) for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    return example_from_holds(holds, order, base_id=base_id)


# ---------------------------------------------------------------------------
# Perplexity
# ---------------------------------------------------------------------------


def test_ppl_uniform_is_vocab_size():
    for v in (2, 121, 484):
        assert abs(perplexity_from_probs([1.0 / v] * 7) - v) < 1e-10


def test_ppl_perfect_model_is_one():
    assert perplexity_from_probs([1.0, 1.0, 1.0]) == 1.0


def test_ppl_hand_case_two_steps():
    assert abs(perplexity_from_probs([0.5, 0.125]) - 4.0) < 1e-10


def test_ppl_zero_probability_is_inf():
    assert perplexity_from_probs([0.5, 0.0]) == math.inf


# ---------------------------------------------------------------------------
# Autoregressive transformer (model B)
# ---------------------------------------------------------------------------


def small_art(max_len=6, **kw):
    kw.setdefault("d_model", 16)
    kw.setdefault("n_heads", 2)
    kw.setdefault("n_blocks", 2)
    kw.setdefault("ff_dim", 32)
    return ARTransformer(ARTConfig(max_len=max_len, **kw))


def test_art_forward_causality_trivial():
    model = small_art()
    ex = random_example(5)
    (tokens, coords), _ = model.collate([ex])
    base = model.forward(tokens, coords)
    t2, c2 = tokens.copy(), coords.copy()
    j = 4
    t2[0, j:] = (t2[0, j:] + 1) % model.cfg.vocab
    c2[0, j:] += 0.123
    changed = model.forward(t2, c2)
    assert np.array_equal(base[0, :j], changed[0, :j])
    assert not np.array_equal(base[0, j:], changed[0, j:])


def test_art_zero_coords_positional_pattern():
    model = small_art()
    half = model.cfg.d_model // 2
    pos = model._pos_embed(np.zeros((1, 2)))
    expected_half = [0.0, 1.0] * (half // 2)
    assert pos[0].tolist() == expected_half + expected_half


def test_art_misaligned_coords_rejected():
    model = small_art()
    with pytest.raises(ValueError, match="misaligned"):
        model.forward(np.zeros((1, 4), dtype=int), np.zeros((1, 3, 2)))


def test_art_gradcheck_full_model():
    model = small_art(seed=3)
    inputs, targets = model.collate([random_example(4, seed=1), random_example(5, seed=2)])

    def f():
        return model.loss_and_grads(inputs, targets)

    assert grad_check(f, model.store, min_coords=110, seed=0) < 1e-4


def test_art_generate_ids_in_candidate_set():
    model = small_art()
    holds = [(0.1, 0.2), (0.5, 0.5), (0.9, 0.1), (0.3, 0.8)]
    order = model.generate(holds)
    assert len(order) == 4
    assert all(t in set(range(4)) | {model.cfg.pad_id} for t in order)


def test_art_generate_slot_init_invariance():
    model = small_art(seed=8)
    holds = [(0.1, 0.2), (0.5, 0.5), (0.9, 0.1), (0.3, 0.8), (0.6, 0.4)]
    rng = np.random.default_rng(0)
    zeros = model.generate(holds)
    for _ in range(3):
        rand_tokens = rng.integers(0, model.cfg.vocab, size=len(holds) - 1)
        rand_coords = rng.uniform(-1, 1, size=(len(holds) - 1, 2))
        assert model.generate(holds, slot_init=(rand_tokens, rand_coords)) == zeros


def test_art_memorizes_single_ordering():
    ex = random_example(5, seed=4)
    model = ARTransformer(ARTConfig(max_len=17, d_model=32, n_heads=2, n_blocks=2, seed=0))
    cfg = TrainConfig(epochs=250, lr=1e-3, batch_size=1, eval_interval=1000, seed=0)
    train_loop(model, [ex], [], cfg)
    assert model.generate(ex.original) == ex.sorted_ids()


def test_art_last_hold_pad_strategy():
    model = small_art(max_len=6, pad_strategy="last_hold")
    ex = random_example(4, seed=12)
    (tokens, _), targets = model.collate([ex])
    last_real = tokens[0, 2 * ex.n - 2]
    assert all(t == last_real for t in tokens[0, 2 * ex.n - 1 :])
    assert model.cfg.pad_id not in tokens


def test_art_constrain_unused_yields_permutation():
    model = small_art()
    holds = [(0.1, 0.2), (0.5, 0.5), (0.9, 0.1)]
    order = model.generate(holds, constrain_unused=True)
    non_pad = [t for t in order if t != model.cfg.pad_id]
    assert len(set(non_pad)) == len(non_pad)


# ---------------------------------------------------------------------------
# Simple transformer (model C)
# ---------------------------------------------------------------------------


def small_simple(max_len=6, **kw):
    kw.setdefault("d_model", 16)
    kw.setdefault("n_heads", 2)
    kw.setdefault("ff_dim", 32)
    return SimpleTransformer(SimpleConfig(max_len=max_len, **kw))


def test_simple_output_shape():
    model = small_simple()
    logits = model.forward(np.zeros((6, 2)))
    assert logits.shape == (6, model.cfg.max_len + 1)


def test_simple_wrong_length_rejected():
    model = small_simple()
    with pytest.raises(ValueError, match="fixed length"):
        model.forward(np.zeros((5, 2)))


def test_simple_gradcheck_full_model():
    model = small_simple(seed=5)
    inputs, targets = model.collate([random_example(4, seed=6), random_example(6, seed=7)])

    def f():
        return model.loss_and_grads(inputs, targets)

    assert grad_check(f, model.store, min_coords=110, seed=1) < 1e-4


def test_simple_seeded_reproducibility():
    a = small_simple(seed=11)
    b = small_simple(seed=11)
    coords = np.random.default_rng(2).uniform(size=(6, 2))
    assert np.array_equal(a.forward(coords), b.forward(coords))


def test_simple_memorizes_five_examples():
    examples = [random_example(5, base_id=i, seed=i) for i in range(5)]
    model = SimpleTransformer(SimpleConfig(max_len=17, d_model=64, n_heads=4, n_blocks=1, seed=0))
    cfg = TrainConfig(epochs=300, lr=1e-3, batch_size=5, eval_interval=1000, seed=0)
    train_loop(model, examples, [], cfg)
    inputs, targets = model.collate(examples)
    acc = token_accuracy(model.predictions(inputs), targets, model.cfg.pad_id)
    assert acc.overall >= 0.99


# ---------------------------------------------------------------------------
# Shared training loop
# ---------------------------------------------------------------------------


def test_train_loop_deterministic_history():
    examples = [random_example(4, base_id=i, seed=i) for i in range(6)]
    runs = []
    for _ in range(2):
        model = small_simple(max_len=6, seed=3)
        cfg = TrainConfig(epochs=5, lr=1e-3, batch_size=3, eval_interval=2, seed=7)
        runs.append(train_loop(model, examples[:4], examples[4:], cfg))
    assert runs[0] == runs[1]


def test_train_loop_best_checkpoint_not_worse_than_final(tmp_path):
    examples = [random_example(4, base_id=i, seed=i) for i in range(8)]
    model = small_art(max_len=6, seed=4)
    ckpt = tmp_path / "art.json"
    cfg = TrainConfig(epochs=12, lr=5e-3, batch_size=4, eval_interval=2, seed=1,
                      checkpoint_path=str(ckpt))
    history = train_loop(model, examples[:6], examples[6:], cfg)
    _, best_cfg = load_checkpoint(tmp_path / "art_best.json")
    final_vals = [row["val_loss"] for row in history if "val_loss" in row]
    assert best_cfg["val_loss"] <= final_vals[-1] + 1e-12


def test_train_loop_ignore_pads_flag():
    examples = [random_example(3, base_id=i, seed=i) for i in range(4)]
    model = small_simple(max_len=6, seed=9)
    cfg = TrainConfig(epochs=2, lr=1e-3, batch_size=4, seed=0, ignore_pads=True)
    history = train_loop(model, examples, [], cfg)
    assert len(history) == 2


def test_history_csv_columns():
    rows = [
        {"epoch": 1, "train_loss": 0.5},
        {"epoch": 2, "train_loss": 0.25, "val_loss": 0.3, "val_acc": 0.5},
    ]
    text = history_to_csv(rows).decode()
    lines = text.splitlines()
    assert lines[0] == "epoch,train_loss,val_loss,val_ppl,val_acc"
    assert lines[1].startswith("1,0.5,,")


# ---------------------------------------------------------------------------
# Token accuracy
# ---------------------------------------------------------------------------


def test_token_accuracy_identical():
    acc = token_accuracy([1, 2, 3], [1, 2, 3], pad_id=17)
    assert acc.overall == 1.0


def test_token_accuracy_6_of_17():
    target = list(range(14)) + [17, 17, 17]
    pred = list(target)
    for i in range(3, 14):
        pred[i] = (target[i] + 1) % 14  # break 11 of the 14 real positions
    acc = token_accuracy(pred, target, pad_id=17)
    assert abs(acc.overall - 6 / 17) < 1e-12
    assert abs(acc.overall - 0.353) < 1e-3


def test_token_accuracy_all_pad_degenerate():
    target = list(range(14)) + [17, 17, 17]
    pred = [17] * 17
    acc = token_accuracy(pred, target, pad_id=17)
    assert abs(acc.overall - 3 / 17) < 1e-12
    assert acc.non_pad == 0.0
    assert acc.pad_output_fraction == 1.0


def test_token_accuracy_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        token_accuracy([1, 2], [1, 2, 3])


# ---------------------------------------------------------------------------
# Seq2seq (model A)
# ---------------------------------------------------------------------------


TOY_CORPUS = [
    (["0.2_0.3", "0.4_0.7"], ["LH_0.2_0.3", "RH_0.4_0.7"]),
    (["0.4_0.7", "0.6_0.5"], ["RH_0.4_0.7", "LH_0.6_0.5"]),
    (["0.6_0.5"], ["LF_0.6_0.5"]),
    (["0.2_0.3", "0.6_0.5", "0.4_0.7"], ["LH_0.2_0.3", "LF_0.6_0.5", "RH_0.4_0.7"]),
    (["0.8_0.2", "0.2_0.3"], ["RF_0.8_0.2", "LH_0.2_0.3", "RF_0.8_0.2"]),
]


def toy_vocabs():
    in_words = [w for src, _ in TOY_CORPUS for w in src]
    out_words = [w for _, tgt in TOY_CORPUS for w in tgt]
    return Vocab.from_words(in_words), Vocab.from_words(out_words)


def small_seq2seq(hidden=24, seed=0):
    iv, ov = toy_vocabs()
    return Seq2Seq(Seq2SeqConfig(hidden=hidden, seed=seed), iv, ov)


def test_seq2seq_gradcheck():
    model = small_seq2seq(hidden=10)
    src = model.in_vocab.encode(TOY_CORPUS[0][0])
    tgt = model.out_vocab.encode(TOY_CORPUS[0][1])

    def f():
        loss, _ = model.loss_and_grads(src, tgt, teacher_forcing=1.0)
        return loss

    assert grad_check(f, model.store, min_coords=120, seed=2) < 1e-4


def test_teacher_forcing_one_uses_gold_prefix():
    model = small_seq2seq()
    src = model.in_vocab.encode(TOY_CORPUS[3][0])
    tgt = model.out_vocab.encode(TOY_CORPUS[3][1])
    _, used = model.loss_and_grads(src, tgt, teacher_forcing=1.0)
    assert used == [model.out_vocab.sos_id] + tgt


def test_lr_zero_constant_loss_history():
    model = small_seq2seq()
    cfg = TrainConfig(epochs=4, lr=0.0, teacher_forcing=1.0, eval_interval=10, seed=0)
    history = seq2seq_train(model, TOY_CORPUS, cfg)
    losses = {round(row["train_loss"], 12) for row in history}
    assert len(losses) == 1


def test_seq2seq_memorizes_toy_corpus():
    model = small_seq2seq(hidden=48, seed=1)
    cfg = TrainConfig(epochs=200, lr=5e-3, teacher_forcing=1.0, eval_interval=100, seed=0)
    history = seq2seq_train(model, TOY_CORPUS, cfg)
    assert history[-1]["train_loss"] < 0.1
    for src, tgt in TOY_CORPUS:
        assert model.translate(src) == tgt
    assert perplexity(model, TOY_CORPUS) < 1.2


def test_translate_empty_input_is_empty():
    model = small_seq2seq()
    assert model.translate([]) == []


def test_translate_emits_only_content_words():
    model = small_seq2seq(seed=5)  # untrained: argmax over masked logits
    out = model.translate(["0.2_0.3", "unknown_word"])
    for word in out:
        limb, x, y = word.split("_")
        assert limb in {"LH", "RH", "LF", "RF"}
        float(x), float(y)


def test_perplexity_matches_cross_entropy_oracle():
    from betaboard.nn import softmax_cross_entropy

    model = small_seq2seq(seed=6)
    log_probs = []
    for src, tgt in TOY_CORPUS:
        log_probs.extend(model.sentence_log_probs(src, tgt))
    ppl = perplexity(model, TOY_CORPUS)
    assert abs(ppl - math.exp(-sum(log_probs) / len(log_probs))) < 1e-10
