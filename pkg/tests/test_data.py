from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betaboard.data import (
    DEFAULT_MAX_LEN,
    PAD_COORD,
    DatasetManifest,
    OrderedHoldsExample,
    Vocab,
    build_seq2seq_vocabs,
    coord_word,
    dataset_from_json,
    dataset_to_json,
    example_from_holds,
    format_autoregressive_pair,
    holds_sequence_from_json,
    holds_sequence_to_json,
    pad_last_hold,
    pad_to_length,
    parse_move_word,
    permute_augment,
    quantize_coordinate,
    split_train_val,
)
from betaboard.fixtures import limb_cycle_moves


# ---------------------------------------------------------------------------
# Quantization and vocab
# ---------------------------------------------------------------------------


def test_quantize_examples():
    assert quantize_coordinate(0.234) == 0.2
    assert quantize_coordinate(0.05) == 0.1  # half away from zero
    assert quantize_coordinate(1.0) == 1.0
    assert quantize_coordinate(0.0) == 0.0


def test_quantize_out_of_range():
    with pytest.raises(ValueError):
        quantize_coordinate(1.2)
    with pytest.raises(ValueError):
        quantize_coordinate(-0.1)


@given(st.floats(0, 1, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_quantize_idempotent(c):
    q = quantize_coordinate(c)
    assert quantize_coordinate(q) == q
    assert abs(q * 10 - round(q * 10)) < 1e-9


def test_vocab_specials_and_contiguity():
    v = Vocab.from_words(["0.2_0.3", "0.4_0.7", "0.2_0.3"])
    assert len(v) == 5  # 3 specials + 2 content words
    assert sorted(v.word_to_id.values()) == list(range(5))
    assert v.decode(v.encode(["0.2_0.3", "nope"])) == ["0.2_0.3", "<unk>"]


def test_seq2seq_vocab_grid_bounds():
    # full one-decimal grid coverage: 11x11 input words, 4x that output words
    grid = [i / 10 for i in range(11)]
    holds = [[(x, y) for x in grid for y in grid]]
    moves = [limb_cycle_moves([(x, y) for x in grid for y in grid])]
    in_vocab, out_vocab = build_seq2seq_vocabs(moves, holds)
    assert len(in_vocab) <= 11 * 11 + 3
    assert len(in_vocab) == 121 + 3
    assert len(out_vocab) <= 4 * 121 + 3


def test_vocab_single_sentence():
    holds = [[(0.2, 0.3), (0.4, 0.7)]]
    moves = [limb_cycle_moves([(0.2, 0.3)])]
    in_vocab, _ = build_seq2seq_vocabs(moves, holds)
    assert len(in_vocab) == 2 + 3


def test_words_parse_back():
    assert coord_word(0.234, 0.678) == "0.2_0.7"
    limb, x, y = parse_move_word("LH_0.2_0.7")
    assert (limb, x, y) == ("LH", 0.2, 0.7)


# ---------------------------------------------------------------------------
# Augmentation
# ---------------------------------------------------------------------------


def example(n=5, base_id=0, seed=0):
    import random

    rng = random.Random(seed)
    holds = [(round(rng.uniform(0, 1), 3), round(rng.uniform(0, 1), 3)) for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    return example_from_holds(holds, order, base_id=base_id)


def test_augment_20x50_gives_1000():
    bases = [example(n=5, base_id=i, seed=i) for i in range(20)]
    augmented = permute_augment(bases, 50, seed=3)
    assert len(augmented) == 1000


def test_augment_preserves_sorted_and_multiset():
    bases = [example(n=6, base_id=i, seed=i) for i in range(4)]
    for ex in permute_augment(bases, 7, seed=1):
        base = bases[ex.base_id]
        assert ex.sorted == base.sorted
        assert Counter(ex.original) == Counter(ex.sorted)


def test_augment_deterministic():
    bases = [example(n=5, base_id=i) for i in range(3)]
    a = permute_augment(bases, 5, seed=9)
    b = permute_augment(bases, 5, seed=9)
    assert a == b


# ---------------------------------------------------------------------------
# Autoregressive pair formatting
# ---------------------------------------------------------------------------


def test_table_layout_five_holds():
    h = [(0.1, 0.1), (0.2, 0.2), (0.3, 0.3), (0.4, 0.4), (0.5, 0.5)]
    ex = OrderedHoldsExample(
        original=tuple(h), sorted=(h[3], h[1], h[4], h[2], h[0])
    )
    pair = format_autoregressive_pair(ex)
    assert list(pair.input_tokens) == [0, 1, 2, 3, 4, 3, 1, 4, 2]
    assert list(pair.output_tokens) == [1, 2, 3, 4, 3, 1, 4, 2, 0]
    assert pair.input_coords[:5] == ex.original
    assert pair.input_coords[5:] == ex.sorted[:-1]


def test_smallest_case_n2():
    ex = OrderedHoldsExample(original=((0.1, 0.1), (0.2, 0.2)), sorted=((0.1, 0.1), (0.2, 0.2)))
    pair = format_autoregressive_pair(ex)
    assert list(pair.input_tokens) == [0, 1, 0]
    assert list(pair.output_tokens) == [1, 0, 1]


def test_n1_rejected():
    ex = OrderedHoldsExample(original=((0.1, 0.1),), sorted=((0.1, 0.1),))
    with pytest.raises(ValueError):
        format_autoregressive_pair(ex)


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_shift_relation_and_round_trip(data):
    import random

    n = data.draw(st.integers(2, 17))
    seed = data.draw(st.integers(0, 99999))
    rng = random.Random(seed)
    holds = [(rng.random(), rng.random()) for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    ex = example_from_holds(holds, order)
    pair = format_autoregressive_pair(ex)
    inp, out = list(pair.input_tokens), list(pair.output_tokens)
    assert len(inp) == 2 * n - 1 == len(out)
    # shifted-left on the original segment, full sorted segment appended
    assert out[: n - 1] == inp[1:n]
    sorted_ids = out[n - 1 :]
    assert inp[n:] == sorted_ids[:-1]
    # decoding the last n output ids reproduces `sorted`
    assert tuple(ex.original[i] for i in sorted_ids) == ex.sorted
    assert sorted(sorted_ids) == list(range(n))


def test_duplicate_holds_still_permutation():
    h = [(0.5, 0.5), (0.5, 0.5), (0.2, 0.2)]
    ex = example_from_holds(h, [2, 0, 1])
    ids = ex.sorted_ids()
    assert sorted(ids) == [0, 1, 2]


# ---------------------------------------------------------------------------
# Padding
# ---------------------------------------------------------------------------


def make_pair(n):
    return format_autoregressive_pair(example(n=n))


def test_pad_14_to_17_three_pads():
    import random

    rng = random.Random(0)
    holds = [(rng.random(), rng.random()) for _ in range(14)]
    order = list(range(14))
    rng.shuffle(order)
    # a length-14 token sequence padded to 17 gains 3 trailing pads
    ex = example_from_holds(holds[:7], sorted(range(7), key=lambda _: rng.random()))
    pair = format_autoregressive_pair(ex)  # length 13
    assert len(pair.input_tokens) == 13
    padded = pad_to_length(pair, 17)
    assert len(padded.input_tokens) == 17
    assert list(padded.input_tokens[13:]) == [pair.pad_id] * 4
    # length 14 padded to 17 gains exactly 3 pads
    pair14 = pad_to_length(pair, 14)
    padded17 = pad_to_length(pair14, 17)
    assert list(padded17.input_tokens[14:]) == [pair.pad_id] * 3


def test_pad_noop_at_max():
    pair = make_pair(4)  # length 7
    assert pad_to_length(pair, 7) == pair


def test_pad_id_outside_hold_range():
    pair = make_pair(4)
    assert pair.pad_id == DEFAULT_MAX_LEN == 17
    padded = pad_to_length(pair, 9)
    assert all(t == 17 for t in padded.input_tokens[7:])
    assert all(0 <= t <= 16 for t in padded.input_tokens[:7])
    assert padded.input_coords[7:] == (PAD_COORD, PAD_COORD)
    assert padded.n_real == 4


def test_pad_overlong_rejected():
    pair = make_pair(5)  # length 9
    with pytest.raises(ValueError, match="exceeds"):
        pad_to_length(pair, 8)


def test_pad_only_trailing_enforced():
    with pytest.raises(ValueError, match="trailing"):
        from betaboard.data import TokenizedPair

        TokenizedPair(
            input_tokens=(0, 17, 1),
            output_tokens=(1, 0, 17),
            input_coords=((0.1, 0.1), PAD_COORD, (0.2, 0.2)),
            pad_id=17,
            n_real=2,
        )


def test_pad_last_hold_alternate_strategy():
    pair = make_pair(3)  # length 5
    padded = pad_last_hold(pair, 8)
    assert padded.input_tokens[5:] == (pair.input_tokens[-1],) * 3
    assert padded.input_coords[5:] == (pair.input_coords[-1],) * 3


# ---------------------------------------------------------------------------
# Split
# ---------------------------------------------------------------------------


def test_split_16_4_bases():
    bases = [example(n=5, base_id=i, seed=i) for i in range(20)]
    augmented = permute_augment(bases, 10, seed=0)
    train, val = split_train_val(augmented, 0.2, seed=1)
    train_bases = {ex.base_id for ex in train}
    val_bases = {ex.base_id for ex in val}
    assert len(train_bases) == 16 and len(val_bases) == 4
    assert not (train_bases & val_bases)
    assert len(train) + len(val) == len(augmented)


def test_split_deterministic():
    bases = [example(n=4, base_id=i, seed=i) for i in range(6)]
    augmented = permute_augment(bases, 3, seed=0)
    a = split_train_val(augmented, 0.3, seed=42)
    b = split_train_val(augmented, 0.3, seed=42)
    assert a == b


def test_split_too_small_rejected():
    only = permute_augment([example(base_id=0)], 5, seed=0)
    with pytest.raises(ValueError, match="at least 2 base"):
        split_train_val(only, 0.5, seed=0)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def test_holds_sequence_json_round_trip():
    holds = [(0.25, 0.75), (0.5, 0.5)]
    data = holds_sequence_to_json(holds, [1, 0])
    got_holds, got_order = holds_sequence_from_json(data)
    assert got_holds == holds and got_order == [1, 0]
    no_order, order = holds_sequence_from_json(holds_sequence_to_json(holds))
    assert no_order == holds and order is None


def test_holds_sequence_bad_order_rejected():
    data = holds_sequence_to_json([(0.1, 0.1), (0.2, 0.2)], None)
    import json

    payload = json.loads(data)
    payload["order"] = [0, 0]
    with pytest.raises(ValueError, match="permutation"):
        holds_sequence_from_json(json.dumps(payload).encode())


def test_dataset_json_round_trip():
    bases = [example(n=4, base_id=i, seed=i) for i in range(4)]
    augmented = permute_augment(bases, 2, seed=0)
    train, val = split_train_val(augmented, 0.25, seed=0)
    manifest = DatasetManifest(bases=("a", "b", "c", "d"), seed=0, n_perms=2, max_len=17, pad_id=17)
    blob = dataset_to_json(manifest, train, val)
    m2, t2, v2 = dataset_from_json(blob)
    assert m2 == manifest and t2 == train and v2 == val
