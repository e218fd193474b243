"""Pose-landmark data model and stream I/O.

A landmark stream is a per-frame list of 33 body keypoints, each with
normalized (x, y) coordinates and a visibility score, following the
standard 33-point full-body pose topology. Coordinates use image
convention: origin at the top-left, y increasing downward, both axes
normalized to [0, 1].
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import IntEnum
from typing import IO, Iterable, Sequence

import numpy as np

N_LANDMARKS = 33

# Standard 33-point topology index map.
LANDMARK_NAMES = [
    "nose",
    "left_eye_inner", "left_eye", "left_eye_outer",
    "right_eye_inner", "right_eye", "right_eye_outer",
    "left_ear", "right_ear",
    "mouth_left", "mouth_right",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_pinky", "right_pinky",
    "left_index", "right_index",
    "left_thumb", "right_thumb",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
]


class Extremity(IntEnum):
    """The four end-effectors. Enum order doubles as the sort tie-break."""

    LEFT_HAND = 0
    RIGHT_HAND = 1
    LEFT_FOOT = 2
    RIGHT_FOOT = 3

    @property
    def code(self) -> str:
        return _EXTREMITY_CODES[self]

    @classmethod
    def from_code(cls, code: str) -> "Extremity":
        try:
            return _CODE_TO_EXTREMITY[code.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown limb code {code!r}; expected one of LH, RH, LF, RF")


_EXTREMITY_CODES = {
    Extremity.LEFT_HAND: "LH",
    Extremity.RIGHT_HAND: "RH",
    Extremity.LEFT_FOOT: "LF",
    Extremity.RIGHT_FOOT: "RF",
}
_CODE_TO_EXTREMITY = {code: ext for ext, code in _EXTREMITY_CODES.items()}

# Landmark groups defining each extremity: hands use wrist/pinky/index/thumb,
# feet use ankle/heel/foot-index.
EXTREMITY_LANDMARKS: dict[Extremity, tuple[int, ...]] = {
    Extremity.LEFT_HAND: (15, 17, 19, 21),
    Extremity.RIGHT_HAND: (16, 18, 20, 22),
    Extremity.LEFT_FOOT: (27, 29, 31),
    Extremity.RIGHT_FOOT: (28, 30, 32),
}

_EXTREMITY_INDEX_SET = {i for idxs in EXTREMITY_LANDMARKS.values() for i in idxs}

# The 19 landmarks not owned by any extremity (head, torso, arms, legs).
BODY_LANDMARKS: tuple[int, ...] = tuple(
    i for i in range(N_LANDMARKS) if i not in _EXTREMITY_INDEX_SET
)

# Skeleton edge list for rendering (standard full-body pose connections).
SKELETON_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (1, 2), (2, 3), (3, 7),
    (0, 4), (4, 5), (5, 6), (6, 8),
    (9, 10),
    (11, 12), (11, 13), (13, 15), (15, 17), (15, 19), (15, 21), (17, 19),
    (12, 14), (14, 16), (16, 18), (16, 20), (16, 22), (18, 20),
    (11, 23), (12, 24), (23, 24),
    (23, 25), (25, 27), (27, 29), (29, 31), (27, 31),
    (24, 26), (26, 28), (28, 30), (30, 32), (28, 32),
)


@dataclass(frozen=True)
class LandmarkFrame:
    """One video frame's 33 landmark records.

    ``landmarks`` is a (33, 3) float64 array of (x, y, visibility), all
    values in [0, 1].
    """

    frame_index: int
    landmarks: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.landmarks, dtype=np.float64)
        object.__setattr__(self, "landmarks", arr)
        if self.frame_index < 0:
            raise ValueError(f"frame {self.frame_index}: frame_index must be nonnegative")
        if arr.shape != (N_LANDMARKS, 3):
            raise ValueError(
                f"frame {self.frame_index}: expected {N_LANDMARKS} landmarks of "
                f"(x, y, visibility), got array of shape {arr.shape}"
            )
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            bad = np.argwhere((arr < 0.0) | (arr > 1.0))[0]
            raise ValueError(
                f"frame {self.frame_index}: landmark {bad[0]} field {('x', 'y', 'visibility')[bad[1]]} "
                f"out of range [0, 1]: {arr[bad[0], bad[1]]}"
            )


class ParseError(ValueError):
    """Raised when a landmark stream fails to parse or violates invariants."""


CSV_HEADER = ["frame"] + [
    f"l{i}_{field}" for i in range(N_LANDMARKS) for field in ("x", "y", "v")
]


def load_landmark_stream(source: IO[bytes] | bytes, format: str) -> list[LandmarkFrame]:
    """Parse a landmark stream from CSV or JSON bytes.

    Returns frames sorted by frame_index. Raises :class:`ParseError` naming
    the offending frame and field on malformed input.
    """
    if isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    if format == "csv":
        frames = _parse_csv(data)
    elif format == "json":
        frames = _parse_json(data)
    else:
        raise ValueError(f"unknown landmark stream format {format!r}; expected 'csv' or 'json'")
    frames.sort(key=lambda f: f.frame_index)
    return frames


def _parse_csv(data: bytes) -> list[LandmarkFrame]:
    text = data.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty landmark CSV")
    if header != CSV_HEADER:
        raise ParseError(
            f"bad CSV header: expected 'frame,l0_x,l0_y,l0_v,...,l32_x,l32_y,l32_v' "
            f"({len(CSV_HEADER)} columns), got {len(header)} columns"
        )
    frames = []
    for row_num, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ParseError(
                f"row {row_num}: expected {len(CSV_HEADER) - 1} landmark features, got {len(row) - 1}"
            )
        try:
            frame_index = int(row[0])
        except ValueError:
            raise ParseError(f"row {row_num}: malformed frame index {row[0]!r}")
        try:
            values = np.array([float(v) for v in row[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError(f"frame {frame_index}: malformed landmark value in row {row_num}")
        frames.append(_build_frame(frame_index, values.reshape(N_LANDMARKS, 3)))
    return frames


def _parse_json(data: bytes) -> list[LandmarkFrame]:
    try:
        records = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed landmark JSON: {exc}")
    if not isinstance(records, list):
        raise ParseError("landmark JSON must be an array of frame objects")
    frames = []
    for rec in records:
        if not isinstance(rec, dict) or "frame" not in rec or "landmarks" not in rec:
            raise ParseError("each landmark JSON record needs 'frame' and 'landmarks' keys")
        frame_index = rec["frame"]
        lm = rec["landmarks"]
        if not isinstance(lm, list) or len(lm) != N_LANDMARKS:
            raise ParseError(
                f"frame {frame_index}: expected {N_LANDMARKS} landmark entries, "
                f"got {len(lm) if isinstance(lm, list) else type(lm).__name__}"
            )
        try:
            values = np.array(lm, dtype=np.float64)
        except ValueError:
            raise ParseError(f"frame {frame_index}: malformed landmark entry")
        if values.shape != (N_LANDMARKS, 3):
            raise ParseError(
                f"frame {frame_index}: each landmark must be [x, y, v], got shape {values.shape}"
            )
        frames.append(_build_frame(int(frame_index), values))
    return frames


def _build_frame(frame_index: int, values: np.ndarray) -> LandmarkFrame:
    try:
        return LandmarkFrame(frame_index=frame_index, landmarks=values)
    except ValueError as exc:
        raise ParseError(str(exc))


def dump_landmark_csv(frames: Iterable[LandmarkFrame]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for frame in frames:
        writer.writerow([frame.frame_index] + [repr(float(v)) for v in frame.landmarks.ravel()])
    return buf.getvalue().encode("utf-8")


def dump_landmark_json(frames: Iterable[LandmarkFrame]) -> bytes:
    records = [
        {"frame": f.frame_index, "landmarks": f.landmarks.tolist()} for f in frames
    ]
    return json.dumps(records).encode("utf-8")


def frames_to_array(frames: Sequence[LandmarkFrame]) -> np.ndarray:
    """Stack a stream into a (n_frames, 33, 3) array."""
    return np.stack([f.landmarks for f in frames])
