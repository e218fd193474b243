"""Training-data construction.

Coordinate quantization and vocabularies for the translation model;
permutation augmentation, concatenated input/output token formatting, and
fixed-length padding for the ordering transformers; deterministic
grouped train/validation splits.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .motion import MoveSequence

SOS = "<sos>"
EOS = "<eos>"
UNK = "<unk>"
SPECIALS = (SOS, EOS, UNK)

DEFAULT_MAX_LEN = 17
PAD_COORD = (-1.0, -1.0)


def quantize_coordinate(c: float, decimals: int = 1) -> float:
    """Round half away from zero onto the {0, 0.1, ..., 1.0} grid (decimals=1)."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"coordinate {c} outside [0, 1]")
    scale = 10.0**decimals
    return math.floor(c * scale + 0.5) / scale


def coord_word(x: float, y: float, decimals: int = 1) -> str:
    qx = quantize_coordinate(x, decimals)
    qy = quantize_coordinate(y, decimals)
    return f"{qx:.{decimals}f}_{qy:.{decimals}f}"


def move_word(limb_code: str, x: float, y: float, decimals: int = 1) -> str:
    return f"{limb_code}_{coord_word(x, y, decimals)}"


def parse_move_word(word: str) -> tuple[str, float, float]:
    limb, x, y = word.split("_")
    return limb, float(x), float(y)


@dataclass(frozen=True)
class Vocab:
    """Bidirectional word/id map with reserved SOS, EOS, UNK specials."""

    id_to_word: tuple[str, ...]
    word_to_id: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        mapping = {w: i for i, w in enumerate(self.id_to_word)}
        if len(mapping) != len(self.id_to_word):
            raise ValueError("vocabulary words must be unique")
        for special in SPECIALS:
            if special not in mapping:
                raise ValueError(f"vocabulary missing special {special}")
        object.__setattr__(self, "word_to_id", mapping)

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "Vocab":
        content = sorted(set(words) - set(SPECIALS))
        return cls(id_to_word=SPECIALS + tuple(content))

    def __len__(self) -> int:
        return len(self.id_to_word)

    @property
    def sos_id(self) -> int:
        return self.word_to_id[SOS]

    @property
    def eos_id(self) -> int:
        return self.word_to_id[EOS]

    @property
    def unk_id(self) -> int:
        return self.word_to_id[UNK]

    def encode(self, words: Sequence[str]) -> list[int]:
        unk = self.unk_id
        return [self.word_to_id.get(w, unk) for w in words]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.id_to_word[i] for i in ids]


def holds_sentence(holds: Sequence[tuple[float, float]], decimals: int = 1) -> list[str]:
    return [coord_word(x, y, decimals) for x, y in holds]


def moves_sentence(seq: MoveSequence, decimals: int = 1) -> list[str]:
    return [move_word(m.limb.code, m.x, m.y, decimals) for m in seq]


def build_seq2seq_vocabs(
    move_seqs: Sequence[MoveSequence],
    holds_seqs: Sequence[Sequence[tuple[float, float]]],
    decimals: int = 1,
) -> tuple[Vocab, Vocab]:
    """Input vocab over observed "x_y" words, output vocab over "limb_x_y"."""
    if not move_seqs or not holds_seqs:
        raise ValueError("corpora must be nonempty")
    in_words = [w for holds in holds_seqs for w in holds_sentence(holds, decimals)]
    out_words = [w for seq in move_seqs for w in moves_sentence(seq, decimals)]
    return Vocab.from_words(in_words), Vocab.from_words(out_words)


# ---------------------------------------------------------------------------
# Hold-ordering examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderedHoldsExample:
    """A holds sequence in shuffled presentation order plus its usage order.

    ``sorted`` is always a permutation of ``original``; ``base_id`` groups
    augmented copies of the same underlying sequence.
    """

    original: tuple[tuple[float, float], ...]
    sorted: tuple[tuple[float, float], ...]
    base_id: int = 0

    def __post_init__(self) -> None:
        if Counter(self.original) != Counter(self.sorted):
            raise ValueError("sorted must be a permutation of original")

    @property
    def n(self) -> int:
        return len(self.original)

    def sorted_ids(self) -> list[int]:
        """Index of each sorted hold in the original listing.

        Duplicated coordinates pair up first-unused-first, so the result is
        always a proper permutation of 0..n-1.
        """
        used = [False] * self.n
        ids = []
        for hold in self.sorted:
            for i, orig in enumerate(self.original):
                if not used[i] and orig == hold:
                    used[i] = True
                    ids.append(i)
                    break
        return ids


def permute_augment(
    examples: Sequence[OrderedHoldsExample], n_perms: int, seed: int = 0
) -> list[OrderedHoldsExample]:
    """Emit n_perms copies of each example with freshly shuffled originals.

    The sorted side is never altered; deterministic for a given seed.
    """
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    rng = random.Random(seed)
    out = []
    for ex in examples:
        for _ in range(n_perms):
            shuffled = list(ex.original)
            rng.shuffle(shuffled)
            out.append(replace(ex, original=tuple(shuffled)))
    return out


@dataclass(frozen=True)
class TokenizedPair:
    """Concatenated input/output token and coordinate sequences.

    For an n-hold example, tokens 0..n-1 label the original positions; the
    input is the originals followed by all sorted ids but the last, the
    output drops the first original and appends the full sorted ids, giving
    2n-1 tokens each before padding. ``input_coords`` carries each input
    token's hold coordinates; pads use a sentinel coordinate.
    """

    input_tokens: tuple[int, ...]
    output_tokens: tuple[int, ...]
    input_coords: tuple[tuple[float, float], ...]
    pad_id: int
    n_real: int
    base_id: int = 0

    def __post_init__(self) -> None:
        if len(self.input_tokens) != len(self.output_tokens):
            raise ValueError("input and output token sequences must have equal length")
        if len(self.input_coords) != len(self.input_tokens):
            raise ValueError("input_coords must align with input_tokens")
        real = [i for i, t in enumerate(self.input_tokens) if t != self.pad_id]
        if real and real != list(range(len(real))):
            raise ValueError("pad_id may appear only in trailing positions")


def format_autoregressive_pair(ex: OrderedHoldsExample, pad_id: int | None = None) -> TokenizedPair:
    """Build the concatenated completion pair for one example (n >= 2)."""
    n = ex.n
    if n < 2:
        raise ValueError(f"need at least 2 holds, got {n}")
    if pad_id is None:
        pad_id = DEFAULT_MAX_LEN
    sorted_ids = ex.sorted_ids()
    original_ids = list(range(n))
    input_tokens = original_ids + sorted_ids[:-1]
    output_tokens = original_ids[1:] + sorted_ids
    input_coords = [ex.original[t] for t in input_tokens]
    return TokenizedPair(
        input_tokens=tuple(input_tokens),
        output_tokens=tuple(output_tokens),
        input_coords=tuple(input_coords),
        pad_id=pad_id,
        n_real=n,
        base_id=ex.base_id,
    )


def pad_to_length(pair: TokenizedPair, max_len: int, pad_id: int | None = None) -> TokenizedPair:
    """Append trailing pad tokens (with sentinel coordinates) up to max_len."""
    if pad_id is None:
        pad_id = pair.pad_id
    length = len(pair.input_tokens)
    if length > max_len:
        raise ValueError(f"sequence of length {length} exceeds max_len {max_len}")
    extra = max_len - length
    return TokenizedPair(
        input_tokens=pair.input_tokens + (pad_id,) * extra,
        output_tokens=pair.output_tokens + (pad_id,) * extra,
        input_coords=pair.input_coords + (PAD_COORD,) * extra,
        pad_id=pad_id,
        n_real=pair.n_real,
        base_id=pair.base_id,
    )


def pad_last_hold(pair: TokenizedPair, max_len: int) -> TokenizedPair:
    """Alternate padding strategy: repeat the last real token instead of the
    imaginary hold. Off by default; kept for comparison runs."""
    length = len(pair.input_tokens)
    if length > max_len:
        raise ValueError(f"sequence of length {length} exceeds max_len {max_len}")
    extra = max_len - length
    return TokenizedPair(
        input_tokens=pair.input_tokens + (pair.input_tokens[-1],) * extra,
        output_tokens=pair.output_tokens + (pair.output_tokens[-1],) * extra,
        input_coords=pair.input_coords + (pair.input_coords[-1],) * extra,
        pad_id=pair.pad_id,
        n_real=pair.n_real,
        base_id=pair.base_id,
    )


def split_train_val(
    dataset: Sequence[OrderedHoldsExample], val_fraction: float, seed: int = 0
) -> tuple[list[OrderedHoldsExample], list[OrderedHoldsExample]]:
    """Deterministic split grouped by base example.

    Permuted copies of the same base sequence never straddle the split.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must lie in (0, 1)")
    base_ids = sorted({ex.base_id for ex in dataset})
    if len(base_ids) < 2:
        raise ValueError("need at least 2 base examples to split")
    rng = random.Random(seed)
    rng.shuffle(base_ids)
    n_val = int(round(val_fraction * len(base_ids)))
    n_val = min(max(n_val, 1), len(base_ids) - 1)
    val_bases = set(base_ids[:n_val])
    train = [ex for ex in dataset if ex.base_id not in val_bases]
    val = [ex for ex in dataset if ex.base_id in val_bases]
    return train, val


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def holds_sequence_to_json(
    holds: Sequence[tuple[float, float]], order: Sequence[int] | None = None
) -> bytes:
    payload: dict = {"holds": [[x, y] for x, y in holds]}
    if order is not None:
        payload["order"] = list(order)
    return json.dumps(payload, indent=2).encode("utf-8")


def holds_sequence_from_json(data: bytes) -> tuple[list[tuple[float, float]], list[int] | None]:
    payload = json.loads(data)
    holds = [(float(x), float(y)) for x, y in payload["holds"]]
    order = payload.get("order")
    if order is not None:
        order = [int(i) for i in order]
        if sorted(order) != list(range(len(holds))):
            raise ValueError("order must be a permutation of hold indices")
    return holds, order


def example_from_holds(
    holds: Sequence[tuple[float, float]], order: Sequence[int], base_id: int = 0
) -> OrderedHoldsExample:
    original = tuple((float(x), float(y)) for x, y in holds)
    return OrderedHoldsExample(
        original=original,
        sorted=tuple(original[i] for i in order),
        base_id=base_id,
    )


@dataclass(frozen=True)
class DatasetManifest:
    bases: tuple[str, ...]
    seed: int
    n_perms: int
    max_len: int
    pad_id: int

    def to_json(self) -> dict:
        return {
            "bases": list(self.bases),
            "seed": self.seed,
            "n_perms": self.n_perms,
            "max_len": self.max_len,
            "pad_id": self.pad_id,
        }


def dataset_to_json(
    manifest: DatasetManifest,
    train: Sequence[OrderedHoldsExample],
    val: Sequence[OrderedHoldsExample],
) -> bytes:
    def encode(ex: OrderedHoldsExample) -> dict:
        return {
            "base_id": ex.base_id,
            "original": [list(c) for c in ex.original],
            "sorted": [list(c) for c in ex.sorted],
        }

    payload = {
        "manifest": manifest.to_json(),
        "train": [encode(ex) for ex in train],
        "val": [encode(ex) for ex in val],
    }
    return json.dumps(payload).encode("utf-8")


def dataset_from_json(data: bytes) -> tuple[DatasetManifest, list[OrderedHoldsExample], list[OrderedHoldsExample]]:
    payload = json.loads(data)
    man = payload["manifest"]
    manifest = DatasetManifest(
        bases=tuple(man["bases"]),
        seed=int(man["seed"]),
        n_perms=int(man["n_perms"]),
        max_len=int(man["max_len"]),
        pad_id=int(man["pad_id"]),
    )

    def decode(rec: dict) -> OrderedHoldsExample:
        return OrderedHoldsExample(
            original=tuple((float(x), float(y)) for x, y in rec["original"]),
            sorted=tuple((float(x), float(y)) for x, y in rec["sorted"]),
            base_id=int(rec["base_id"]),
        )

    return manifest, [decode(r) for r in payload["train"]], [decode(r) for r in payload["val"]]
