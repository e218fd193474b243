"""Static extremity detection, hold clustering, and move-sequence extraction.

The pipeline: group landmarks into the four extremities, find intervals
where each extremity sits still (static points), cluster those points into
holds with DBSCAN, then order the visits into a move sequence.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pose import EXTREMITY_LANDMARKS, Extremity, LandmarkFrame

NOISE = -1

# Detection defaults: at ~30 fps, min_static_frames=10 is a third-second dwell.
DEFAULT_DIST_THRESHOLD = 0.005
DEFAULT_MIN_STATIC_FRAMES = 10
DEFAULT_EPS = 0.03
DEFAULT_MIN_PTS = 2


@dataclass(frozen=True)
class ExtremityTrack:
    """Per-frame centroid of one extremity's landmark group.

    ``positions`` is a (n_frames, 3) array of (frame_index, x, y), sorted
    strictly ascending by frame_index.
    """

    extremity: Extremity
    positions: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.positions, dtype=np.float64)
        object.__setattr__(self, "positions", arr)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"positions must be (n, 3) of (frame, x, y), got {arr.shape}")
        if arr.shape[0] > 1 and not np.all(np.diff(arr[:, 0]) > 0):
            raise ValueError("track positions must be strictly ascending by frame_index")


@dataclass(frozen=True)
class StaticPoint:
    """An interval where an extremity rested; (x, y) is the interval mean."""

    extremity: Extremity
    frame_start: int
    frame_end: int
    x: float
    y: float

    def __post_init__(self) -> None:
        if self.frame_end < self.frame_start:
            raise ValueError("frame_end must be >= frame_start")


@dataclass(frozen=True)
class Hold:
    """A detected hold: the centroid of one cluster of static points."""

    hold_id: int
    x: float
    y: float


@dataclass(frozen=True)
class Move:
    x: float
    y: float
    limb: Extremity
    order_index: int


@dataclass(frozen=True)
class MoveSequence:
    """Ordered (x, y, limb) triples; order_index runs 0..n-1 without gaps."""

    moves: tuple[Move, ...]

    def __post_init__(self) -> None:
        indices = [m.order_index for m in self.moves]
        if indices != list(range(len(self.moves))):
            raise ValueError("order_index values must be 0..n-1 with no gaps")

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)


def _shifted_mean(arr: np.ndarray, axis: int) -> np.ndarray:
    """Mean computed as v0 + mean(v - v0): exact when all values coincide."""
    first = np.take(arr, [0], axis=axis)
    return np.squeeze(first, axis=axis) + (arr - first).mean(axis=axis)


def extremity_tracks(frames: Sequence[LandmarkFrame]) -> dict[Extremity, ExtremityTrack]:
    """Compute per-frame extremity centroids for a landmark stream.

    Each position is the arithmetic mean of the group's landmark (x, y);
    visibility is ignored.
    """
    if not frames:
        raise ValueError("frame list must be nonempty")
    tracks = {}
    frame_indices = np.array([f.frame_index for f in frames], dtype=np.float64)
    stacked = np.stack([f.landmarks for f in frames])  # (n, 33, 3)
    for ext, idxs in EXTREMITY_LANDMARKS.items():
        centroids = _shifted_mean(stacked[:, idxs, :2], axis=1)  # (n, 2)
        positions = np.column_stack([frame_indices, centroids])
        tracks[ext] = ExtremityTrack(extremity=ext, positions=positions)
    return tracks


def detect_static_points(
    track: ExtremityTrack,
    dist_threshold: float = DEFAULT_DIST_THRESHOLD,
    min_static_frames: int = DEFAULT_MIN_STATIC_FRAMES,
) -> list[StaticPoint]:
    """Find maximal runs of consecutive frames with sub-threshold motion.

    A run qualifies when every consecutive displacement within it is below
    ``dist_threshold`` and it spans at least ``min_static_frames`` frames.
    The point's (x, y) is the mean over the run.
    """
    if dist_threshold <= 0:
        raise ValueError("dist_threshold must be > 0")
    if min_static_frames < 1:
        raise ValueError("min_static_frames must be >= 1")
    pos = track.positions
    n = pos.shape[0]
    if n == 0:
        return []
    steps = np.linalg.norm(np.diff(pos[:, 1:3], axis=0), axis=1)
    still = steps < dist_threshold  # still[i]: step i -> i+1 is static
    points = []
    run_start = 0
    for i in range(n):
        run_ends = i == n - 1 or not still[i]
        if run_ends:
            run_len = i - run_start + 1
            if run_len >= min_static_frames:
                xy = _shifted_mean(pos[run_start : i + 1, 1:3], axis=0)
                points.append(
                    StaticPoint(
                        extremity=track.extremity,
                        frame_start=int(pos[run_start, 0]),
                        frame_end=int(pos[i, 0]),
                        x=float(xy[0]),
                        y=float(xy[1]),
                    )
                )
            run_start = i + 1
    return points


def dbscan(points: Sequence[tuple[float, float]], eps: float, min_pts: int) -> list[int]:
    """Density-based clustering with Euclidean distance.

    Core points have >= min_pts neighbors within eps (themselves included);
    clusters are the density-connected components over core points. A
    non-core point within eps of a core point joins the cluster of its
    nearest core point (exact ties broken by the core's lexicographically
    smallest (x, y), so labeling is independent of input order up to
    relabeling). Everything else is labeled NOISE (-1).

    Returned cluster ids are contiguous from 0 in order of first appearance.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        return []
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    within = dist <= eps
    core = within.sum(axis=1) >= min_pts

    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for start in range(n):
        if not core[start] or labels[start] != NOISE:
            continue
        # Flood-fill the density-connected component of core points.
        labels[start] = cluster
        queue = [start]
        while queue:
            j = queue.pop()
            for k in np.nonzero(within[j] & core)[0]:
                if labels[k] == NOISE:
                    labels[k] = cluster
                    queue.append(int(k))
        cluster += 1

    # Attach border points to their nearest core point's cluster.
    core_idx = np.nonzero(core)[0]
    if core_idx.size:
        for i in range(n):
            if core[i]:
                continue
            cand = core_idx[within[i, core_idx]]
            if cand.size == 0:
                continue
            d = dist[i, cand]
            best = d.min()
            tied = cand[d == best]
            if tied.size > 1:
                order = np.lexsort((pts[tied, 1], pts[tied, 0]))
                tied = tied[order]
            labels[i] = labels[tied[0]]
    return [int(v) for v in labels]


def cluster_holds(
    static_points: Sequence[StaticPoint],
    eps: float = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
) -> tuple[list[Hold], list[int]]:
    """Cluster static points into holds; returns (holds, per-point labels)."""
    labels = dbscan([(p.x, p.y) for p in static_points], eps=eps, min_pts=min_pts)
    holds = []
    for hold_id in range(max(labels, default=-1) + 1):
        members = np.array(
            [(p.x, p.y) for p, lab in zip(static_points, labels) if lab == hold_id]
        )
        centroid = _shifted_mean(members, axis=0)
        holds.append(Hold(hold_id=hold_id, x=float(centroid[0]), y=float(centroid[1])))
    return holds, labels


def extract_move_sequence(
    static_points: Sequence[StaticPoint],
    holds: Sequence[Hold],
    assignment: Sequence[int],
) -> MoveSequence:
    """Order hold visits into a move sequence.

    Each non-noise static point becomes one Move carrying its assigned
    hold's centroid and the point's extremity. Moves sort by frame_start,
    ties broken LH < RH < LF < RF; NOISE points are dropped.
    """
    if len(static_points) != len(assignment):
        raise ValueError("assignment must map every static point")
    hold_by_id = {h.hold_id: h for h in holds}
    visits = []
    for point, label in zip(static_points, assignment):
        if label == NOISE:
            continue
        if label not in hold_by_id:
            raise ValueError(f"static point assigned to unknown hold {label}")
        visits.append((point.frame_start, point.extremity, hold_by_id[label]))
    visits.sort(key=lambda v: (v[0], int(v[1])))
    moves = tuple(
        Move(x=hold.x, y=hold.y, limb=ext, order_index=i)
        for i, (_, ext, hold) in enumerate(visits)
    )
    return MoveSequence(moves=moves)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

MOVE_CSV_HEADER = ["x", "y", "limb"]


def dump_move_csv(seq: MoveSequence) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MOVE_CSV_HEADER)
    for move in seq:
        writer.writerow([repr(float(move.x)), repr(float(move.y)), move.limb.code])
    return buf.getvalue().encode("utf-8")


def load_move_csv(data: bytes) -> MoveSequence:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader, None)
    if header != MOVE_CSV_HEADER:
        raise ValueError(f"bad move CSV header {header!r}; expected {MOVE_CSV_HEADER}")
    moves = []
    for i, row in enumerate(r for r in reader if r):
        if len(row) != 3:
            raise ValueError(f"move row {i}: expected x,y,limb")
        moves.append(
            Move(x=float(row[0]), y=float(row[1]), limb=Extremity.from_code(row[2]), order_index=i)
        )
    return MoveSequence(moves=tuple(moves))


def static_points_to_json(points: Sequence[StaticPoint]) -> bytes:
    records = [
        {
            "extremity": p.extremity.code,
            "frame_start": p.frame_start,
            "frame_end": p.frame_end,
            "x": p.x,
            "y": p.y,
        }
        for p in points
    ]
    return json.dumps({"points": records}, indent=2).encode("utf-8")


def static_points_from_json(data: bytes) -> list[StaticPoint]:
    payload = json.loads(data)
    return [
        StaticPoint(
            extremity=Extremity.from_code(rec["extremity"]),
            frame_start=int(rec["frame_start"]),
            frame_end=int(rec["frame_end"]),
            x=float(rec["x"]),
            y=float(rec["y"]),
        )
        for rec in payload["points"]
    ]


def holds_to_json(holds: Sequence[Hold], assignment: Sequence[int] | None = None) -> bytes:
    payload: dict = {"holds": [[h.x, h.y] for h in holds]}
    if assignment is not None:
        payload["assignment"] = list(assignment)
    return json.dumps(payload, indent=2).encode("utf-8")


def holds_from_json(data: bytes) -> tuple[list[Hold], list[int] | None]:
    payload = json.loads(data)
    holds = [Hold(hold_id=i, x=float(x), y=float(y)) for i, (x, y) in enumerate(payload["holds"])]
    assignment = payload.get("assignment")
    return holds, assignment
