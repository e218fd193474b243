"""Synthetic fixture generation: climber streams and authored board sequences.

Everything here is deterministic given a seed, so the committed fixture
pack can be regenerated bit-for-bit by scripts/make_fixtures.py and every
test runs offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .motion import Move, MoveSequence, dump_move_csv
from .pose import (
    BODY_LANDMARKS,
    EXTREMITY_LANDMARKS,
    N_LANDMARKS,
    Extremity,
    LandmarkFrame,
    dump_landmark_csv,
)
from .data import holds_sequence_to_json

GRID_COLS = 11
GRID_ROWS = 18


def board_cell_center(col: int, row: int) -> tuple[float, float]:
    """Normalized center of a board cell; row 0 is the top row."""
    if not (0 <= col < GRID_COLS and 0 <= row < GRID_ROWS):
        raise ValueError(f"cell ({col}, {row}) outside the {GRID_COLS}x{GRID_ROWS} board")
    return ((col + 0.5) / GRID_COLS, (row + 0.5) / GRID_ROWS)


def convex_body_map(seed: int = 7) -> np.ndarray:
    """Affine map from the 8 extremity features to body landmark coordinates.

    Rows of Dirichlet weights keep every body coordinate a convex
    combination of extremity coordinates, hence inside [0, 1]; the bias
    column is zero. Shape (9, 38) to match the regressor layout.
    """
    rng = np.random.default_rng(seed)
    n_out = 2 * len(BODY_LANDMARKS)
    weights = rng.dirichlet(np.full(8, 0.3), size=n_out).T  # (8, n_out)
    return np.vstack([weights, np.zeros((1, n_out))])


def _frame_from_extremities(
    frame_index: int, ext_pos: np.ndarray, body_map: np.ndarray
) -> LandmarkFrame:
    features = ext_pos.reshape(8)
    body = (np.concatenate([features, [1.0]]) @ body_map).reshape(len(BODY_LANDMARKS), 2)
    landmarks = np.zeros((N_LANDMARKS, 3))
    landmarks[:, 2] = 1.0
    for ext in Extremity:
        for idx in EXTREMITY_LANDMARKS[ext]:
            landmarks[idx, :2] = ext_pos[int(ext)]
    for j, idx in enumerate(BODY_LANDMARKS):
        landmarks[idx, :2] = body[j]
    return LandmarkFrame(frame_index=frame_index, landmarks=landmarks)


@dataclass(frozen=True)
class ClimberFixture:
    frames: tuple[LandmarkFrame, ...]
    ground_truth: MoveSequence
    dwell_frames: int
    travel_frames: int


def synth_climber_stream(
    script: Sequence[tuple[Extremity, tuple[float, float]]],
    dwell_frames: int = 20,
    travel_frames: int = 10,
    body_seed: int = 7,
) -> ClimberFixture:
    """Generate a landmark stream following a scripted climb.

    The script's first four entries place each extremity on its start hold
    (all static at frame 0); each later entry moves one extremity linearly
    to its next hold over ``travel_frames`` steps, then dwells. The ground
    truth is the visit order the detection pipeline should recover: the
    four initial placements (frame 0, tie-broken LH < RH < LF < RF)
    followed by the scripted moves in order.
    """
    starts = dict(script[:4])
    if set(starts) != set(Extremity):
        raise ValueError("script must start by placing all four extremities")

    body_map = convex_body_map(body_seed)
    current = np.zeros((4, 2))
    for ext, hold in starts.items():
        current[int(ext)] = hold

    ext_frames = [current.copy()]
    for _ in range(dwell_frames - 1):
        ext_frames.append(current.copy())

    visits: list[tuple[Extremity, tuple[float, float]]] = sorted(
        starts.items(), key=lambda kv: int(kv[0])
    )
    for ext, hold in script[4:]:
        source = current[int(ext)].copy()
        target = np.asarray(hold)
        for step in range(1, travel_frames + 1):
            snapshot = current.copy()
            snapshot[int(ext)] = source + (step / travel_frames) * (target - source)
            if step == travel_frames:
                snapshot[int(ext)] = target
            ext_frames.append(snapshot)
            current = snapshot.copy()
        for _ in range(dwell_frames):
            ext_frames.append(current.copy())
        visits.append((ext, tuple(float(v) for v in target)))

    frames = tuple(
        _frame_from_extremities(i, pos, body_map) for i, pos in enumerate(ext_frames)
    )
    moves = tuple(
        Move(x=hold[0], y=hold[1], limb=ext, order_index=i)
        for i, (ext, hold) in enumerate(visits)
    )
    return ClimberFixture(
        frames=frames,
        ground_truth=MoveSequence(moves=moves),
        dwell_frames=dwell_frames,
        travel_frames=travel_frames,
    )


def default_climb_script() -> list[tuple[Extremity, tuple[float, float]]]:
    """A hand-authored board climb with hold revisits.

    Every extremity visits at least three non-collinear holds so the
    resulting stream supports a full-rank body-regressor fit.
    """
    LH, RH, LF, RF = (
        Extremity.LEFT_HAND,
        Extremity.RIGHT_HAND,
        Extremity.LEFT_FOOT,
        Extremity.RIGHT_FOOT,
    )
    c = board_cell_center
    return [
        (LH, c(3, 14)),
        (RH, c(6, 14)),
        (LF, c(5, 17)),
        (RF, c(7, 17)),
        (LH, c(2, 11)),
        (RH, c(6, 10)),
        (LF, c(3, 14)),  # revisits LH's start hold
        (RF, c(6, 14)),  # revisits RH's start hold
        (LH, c(4, 7)),
        (RH, c(7, 6)),
        (LF, c(2, 11)),  # revisits LH's second hold
        (RF, c(6, 10)),  # revisits RH's second hold
        (RH, c(5, 3)),
        (LH, c(5, 1)),
    ]


def make_board_sequences(
    n_sequences: int = 20, seed: int = 11, min_holds: int = 4, max_holds: int = 8
) -> list[dict]:
    """Author ordered holds sequences on the board grid.

    Usage order ascends the wall (bottom to top with small detours); the
    presentation order is a seeded shuffle of it. Returns dicts with
    ``holds`` (presentation order) and ``order`` (indices in usage order).
    """
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(n_sequences):
        n = int(rng.integers(min_holds, max_holds + 1))
        rows = np.sort(rng.choice(GRID_ROWS, size=n, replace=False))[::-1]
        cols = rng.integers(0, GRID_COLS, size=n)
        usage = [board_cell_center(int(c), int(r)) for c, r in zip(cols, rows)]
        perm = rng.permutation(n)
        holds = [usage[i] for i in perm]
        order = [int(np.nonzero(perm == k)[0][0]) for k in range(n)]
        sequences.append({"holds": holds, "order": order})
    return sequences


def limb_cycle_moves(holds_in_usage_order: Sequence[tuple[float, float]]) -> MoveSequence:
    """Assign limbs round-robin to a usage-ordered holds list (hands first)."""
    cycle = [
        Extremity.LEFT_HAND,
        Extremity.RIGHT_HAND,
        Extremity.LEFT_FOOT,
        Extremity.RIGHT_FOOT,
    ]
    moves = tuple(
        Move(x=x, y=y, limb=cycle[i % 4], order_index=i)
        for i, (x, y) in enumerate(holds_in_usage_order)
    )
    return MoveSequence(moves=moves)


def write_fixture_pack(root: str | Path) -> dict:
    """Write the full fixture pack; returns the manifest dict."""
    root = Path(root)
    streams_dir = root / "streams"
    seq_dir = root / "sequences"
    streams_dir.mkdir(parents=True, exist_ok=True)
    seq_dir.mkdir(parents=True, exist_ok=True)

    fixture = synth_climber_stream(default_climb_script())
    (streams_dir / "climber.csv").write_bytes(dump_landmark_csv(fixture.frames))
    (streams_dir / "climber_truth.csv").write_bytes(dump_move_csv(fixture.ground_truth))

    sequences = make_board_sequences()
    seq_files = []
    for i, seq in enumerate(sequences):
        name = f"seq_{i:02d}.json"
        (seq_dir / name).write_bytes(holds_sequence_to_json(seq["holds"], seq["order"]))
        usage = [seq["holds"][j] for j in seq["order"]]
        moves_name = f"seq_{i:02d}_moves.csv"
        (seq_dir / moves_name).write_bytes(dump_move_csv(limb_cycle_moves(usage)))
        seq_files.append(name)

    manifest = {
        "climber_stream": "streams/climber.csv",
        "climber_truth": "streams/climber_truth.csv",
        "climber_frames": len(fixture.frames),
        "detect": {"dist_threshold": 0.005, "min_static_frames": 10},
        "cluster": {"eps": 0.03, "min_pts": 1},
        "sequences": seq_files,
        "board": {"cols": GRID_COLS, "rows": GRID_ROWS},
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def fixture_root() -> Path:
    """Location of the committed fixture pack (repo root /fixtures)."""
    return Path(__file__).resolve().parents[2] / "fixtures"
