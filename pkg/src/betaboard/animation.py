"""Skeleton animation: extremity interpolation, body regression, rendering.

A move sequence drives the four extremities one move at a time; the rest of
the body is filled in by a linear regressor fitted on recorded landmark
streams. The result is a full 33-landmark clip that can be rendered frame
by frame.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .motion import MoveSequence
from .pose import (
    BODY_LANDMARKS,
    EXTREMITY_LANDMARKS,
    N_LANDMARKS,
    SKELETON_EDGES,
    Extremity,
    LandmarkFrame,
)

logger = logging.getLogger(__name__)

CLAMP_LO = -0.5
CLAMP_HI = 1.5

# Fallback stance for extremities that never move in a sequence: hands at
# mid-wall shoulder width, feet near the bottom edge (y grows downward).
NEUTRAL_START_POSE: dict[Extremity, tuple[float, float]] = {
    Extremity.LEFT_HAND: (0.4, 0.85),
    Extremity.RIGHT_HAND: (0.6, 0.85),
    Extremity.LEFT_FOOT: (0.45, 0.98),
    Extremity.RIGHT_FOOT: (0.55, 0.98),
}


@dataclass(frozen=True)
class ExtremityTrajectory:
    """Per-frame positions of the four extremities.

    ``positions`` has shape (n_frames, 4, 2), indexed by :class:`Extremity`
    value; at every frame at most one extremity moves while the other three
    hold their previous positions exactly.
    """

    positions: np.ndarray
    # (move_index, extremity, first_frame, last_frame) per executed move
    segments: tuple[tuple[int, Extremity, int, int], ...] = ()

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]


def default_start_pose(seq: MoveSequence) -> dict[Extremity, tuple[float, float]]:
    """Each extremity starts at its own first hold in the sequence.

    Extremities that never move fall back to a neutral stance.
    """
    pose = dict(NEUTRAL_START_POSE)
    seen: set[Extremity] = set()
    for move in seq:
        if move.limb not in seen:
            pose[move.limb] = (move.x, move.y)
            seen.add(move.limb)
    return pose


def _round_half_away(x: float) -> int:
    return int(np.floor(x + 0.5)) if x >= 0 else -int(np.floor(-x + 0.5))


def interpolate_extremities(
    seq: MoveSequence,
    start_pose: dict[Extremity, tuple[float, float]] | None = None,
    avg_frames_per_move: int = 120,
) -> ExtremityTrajectory:
    """Linearly interpolate extremity positions through the move sequence.

    Moves execute one at a time in order. Move k runs over
    ``n_k = max(1, round(avg_frames_per_move * d_k / d_mean))`` frames where
    d_k is its Euclidean distance and d_mean the mean distance over all
    moves (zero mean degenerates to avg_frames_per_move). The first and
    last frame of every move match source and target exactly; the other
    three extremities are frozen bit-identically.
    """
    if avg_frames_per_move < 1:
        raise ValueError("avg_frames_per_move must be >= 1")
    if len(seq) == 0:
        raise ValueError("move sequence must be nonempty")
    if start_pose is None:
        start_pose = default_start_pose(seq)

    current = np.zeros((4, 2), dtype=np.float64)
    for ext in Extremity:
        current[int(ext)] = start_pose[ext]

    distances = []
    probe = current.copy()
    for move in seq:
        target = np.array([move.x, move.y])
        distances.append(float(np.linalg.norm(target - probe[int(move.limb)])))
        probe[int(move.limb)] = target
    d_mean = float(np.mean(distances))

    frames = [current.copy()]
    segments = []
    for move, d in zip(seq, distances):
        ext = move.limb
        source = current[int(ext)].copy()
        target = np.array([move.x, move.y])
        if d_mean == 0.0:
            n_k = avg_frames_per_move
        else:
            n_k = max(1, _round_half_away(avg_frames_per_move * d / d_mean))
        first = len(frames)
        for step in range(1, n_k + 1):
            snapshot = current.copy()
            if step == n_k:
                snapshot[int(ext)] = target
            else:
                snapshot[int(ext)] = source + (step / n_k) * (target - source)
            frames.append(snapshot)
        current = frames[-1].copy()
        segments.append((move.order_index, ext, first, len(frames) - 1))

    return ExtremityTrajectory(
        positions=np.stack(frames), segments=tuple(segments)
    )


@dataclass
class BodyRegressor:
    """Least-squares map from extremity features to body landmark coordinates.

    ``weights`` has shape (9, 38): 8 extremity coordinates plus a bias term
    in, (x, y) for each of the 19 non-extremity landmarks out.
    """

    weights: np.ndarray
    n_frames_fit: int = 0
    r2_per_output: np.ndarray = field(default_factory=lambda: np.zeros(0))

    FEATURE_DIM = 2 * len(Extremity) + 1

    def __post_init__(self) -> None:
        expected = (self.FEATURE_DIM, 2 * len(BODY_LANDMARKS))
        if self.weights.shape != expected:
            raise ValueError(f"regressor weights must be {expected}, got {self.weights.shape}")

    def predict(self, extremity_features: np.ndarray) -> np.ndarray:
        """Map (..., 8) extremity coordinates to (..., 19, 2) body coordinates."""
        feats = np.asarray(extremity_features, dtype=np.float64)
        design = np.concatenate([feats, np.ones(feats.shape[:-1] + (1,))], axis=-1)
        out = design @ self.weights
        return out.reshape(feats.shape[:-1] + (len(BODY_LANDMARKS), 2))


class RegressorFitError(ValueError):
    pass


def extremity_features(frames: Sequence[LandmarkFrame]) -> np.ndarray:
    """Per-frame 8-vector of extremity-centroid coordinates (LH RH LF RF x,y)."""
    stacked = np.stack([f.landmarks for f in frames])
    cols = []
    for ext in Extremity:
        idxs = EXTREMITY_LANDMARKS[ext]
        cols.append(stacked[:, idxs, :2].mean(axis=1))
    return np.concatenate(cols, axis=1)


def body_targets(frames: Sequence[LandmarkFrame]) -> np.ndarray:
    """Per-frame flattened (x, y) of the 19 non-extremity landmarks."""
    stacked = np.stack([f.landmarks for f in frames])
    return stacked[:, BODY_LANDMARKS, :2].reshape(len(frames), -1)


def fit_body_regressor(
    streams: Sequence[Sequence[LandmarkFrame]],
    holdout_fraction: float = 0.2,
    seed: int = 0,
) -> BodyRegressor:
    """Ordinary least squares from extremity centroids (+bias) to body landmarks.

    Fits on a seeded 80% of frames and stores R² per output on the held-out
    20%. Raises :class:`RegressorFitError` on a rank-deficient design.
    """
    all_frames = [f for stream in streams for f in stream]
    feats = extremity_features(all_frames)
    targets = body_targets(all_frames)
    n = feats.shape[0]
    if n <= BodyRegressor.FEATURE_DIM:
        raise RegressorFitError(
            f"need more than {BodyRegressor.FEATURE_DIM} frames to fit, got {n}"
        )

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_holdout = max(1, int(round(holdout_fraction * n)))
    holdout_idx = order[:n_holdout]
    train_idx = order[n_holdout:]

    design = np.column_stack([feats[train_idx], np.ones(len(train_idx))])
    solution, _, rank, _ = np.linalg.lstsq(design, targets[train_idx], rcond=None)
    if rank < BodyRegressor.FEATURE_DIM:
        raise RegressorFitError(
            f"rank-deficient design matrix: rank {rank} < {BodyRegressor.FEATURE_DIM}; "
            "extremity features are collinear"
        )

    hold_design = np.column_stack([feats[holdout_idx], np.ones(len(holdout_idx))])
    pred = hold_design @ solution
    resid = targets[holdout_idx] - pred
    ss_res = (resid**2).sum(axis=0)
    centered = targets[holdout_idx] - targets[holdout_idx].mean(axis=0)
    ss_tot = (centered**2).sum(axis=0)
    tiny = 1e-18
    r2 = np.where(ss_res <= tiny, 1.0, 1.0 - ss_res / np.maximum(ss_tot, tiny))

    return BodyRegressor(weights=solution, n_frames_fit=n, r2_per_output=r2)


@dataclass(frozen=True)
class AnimationClip:
    """Full 33-landmark frame sequence with all visibilities forced to 1."""

    frames: tuple[LandmarkFrame, ...]
    fps: int = 30

    @property
    def frames_total(self) -> int:
        return len(self.frames)


def synthesize_clip(
    traj: ExtremityTrajectory, reg: BodyRegressor, fps: int = 30
) -> AnimationClip:
    """Compose extremity trajectory and regressed body into a full clip.

    All landmarks in an extremity group share the group position; body
    landmarks come from the regressor, clamped to [-0.5, 1.5] (clamping is
    logged when triggered). Visibility is 1 everywhere.
    """
    n = traj.n_frames
    feats = traj.positions.reshape(n, 8)
    body = reg.predict(feats)
    clipped = np.clip(body, CLAMP_LO, CLAMP_HI)
    n_clamped = int(np.sum(clipped != body))
    if n_clamped:
        logger.warning("clamped %d regressed body coordinates to [%s, %s]",
                       n_clamped, CLAMP_LO, CLAMP_HI)
    frames = []
    for t in range(n):
        landmarks = np.zeros((N_LANDMARKS, 3), dtype=np.float64)
        landmarks[:, 2] = 1.0
        for ext in Extremity:
            for idx in EXTREMITY_LANDMARKS[ext]:
                landmarks[idx, :2] = traj.positions[t, int(ext)]
        for j, idx in enumerate(BODY_LANDMARKS):
            landmarks[idx, :2] = clipped[t, j]
        frames.append(_ClipFrame(frame_index=t, landmarks=landmarks))
    return AnimationClip(frames=tuple(frames), fps=fps)


class _ClipFrame(LandmarkFrame):
    """LandmarkFrame without the [0, 1] range check.

    Synthesized clips may legitimately carry clamped coordinates outside
    the unit square; structure invariants still apply.
    """

    def __post_init__(self) -> None:
        arr = np.asarray(self.landmarks, dtype=np.float64)
        object.__setattr__(self, "landmarks", arr)
        if arr.shape != (N_LANDMARKS, 3):
            raise ValueError(f"expected ({N_LANDMARKS}, 3) landmarks, got {arr.shape}")


def clip_to_json(clip: AnimationClip) -> bytes:
    payload = {
        "fps": clip.fps,
        "frames": [{"landmarks": f.landmarks[:, :2].tolist()} for f in clip.frames],
    }
    return json.dumps(payload).encode("utf-8")


def clip_from_json(data: bytes) -> AnimationClip:
    payload = json.loads(data)
    frames = []
    for t, rec in enumerate(payload["frames"]):
        xy = np.asarray(rec["landmarks"], dtype=np.float64)
        if xy.shape != (N_LANDMARKS, 2):
            raise ValueError(f"clip frame {t}: expected ({N_LANDMARKS}, 2) landmarks")
        landmarks = np.column_stack([xy, np.ones(N_LANDMARKS)])
        frames.append(_ClipFrame(frame_index=t, landmarks=landmarks))
    return AnimationClip(frames=tuple(frames), fps=int(payload["fps"]))


def regressor_to_json(reg: BodyRegressor) -> bytes:
    payload = {
        "weights": reg.weights.tolist(),
        "n_frames_fit": reg.n_frames_fit,
        "r2_per_output": reg.r2_per_output.tolist(),
    }
    return json.dumps(payload).encode("utf-8")


def regressor_from_json(data: bytes) -> BodyRegressor:
    payload = json.loads(data)
    return BodyRegressor(
        weights=np.asarray(payload["weights"], dtype=np.float64),
        n_frames_fit=int(payload["n_frames_fit"]),
        r2_per_output=np.asarray(payload["r2_per_output"], dtype=np.float64),
    )


def render_frames(
    clip: AnimationClip,
    out_dir: str | Path,
    width: int = 440,
    height: int = 720,
    edges: Sequence[tuple[int, int]] = SKELETON_EDGES,
    dot_radius: int = 3,
) -> list[Path]:
    """Render one lossless PNG per frame as frame_00000.png, frame_00001.png, ...

    Landmarks scale from normalized coordinates to pixels as
    (x * width, y * height); edges are drawn between connected landmarks.
    """
    from PIL import Image, ImageDraw

    if width <= 0 or height <= 0:
        raise ValueError(f"canvas must be positive, got {width}x{height}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for t, frame in enumerate(clip.frames):
        img = Image.new("RGB", (width, height), (255, 255, 255))
        draw = ImageDraw.Draw(img)
        px = frame.landmarks[:, 0] * width
        py = frame.landmarks[:, 1] * height
        for a, b in edges:
            draw.line([(px[a], py[a]), (px[b], py[b])], fill=(40, 90, 160), width=2)
        for x, y in zip(px, py):
            draw.ellipse(
                [x - dot_radius, y - dot_radius, x + dot_radius, y + dot_radius],
                fill=(200, 60, 40),
            )
        path = out / f"frame_{t:05d}.png"
        img.save(path, format="PNG")
        paths.append(path)
    return paths
