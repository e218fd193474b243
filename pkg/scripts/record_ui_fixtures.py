#!/usr/bin/env python3
"""Record the frontend test fixtures from the real backend (deterministic).

Writes frontend/fixtures/: a small clip JSON, a /predict-order response for
the first authored board sequence, and the holds payload that produced it.
"""

import json
import sys
import tempfile
from pathlib import Path

from betaboard.animation import (
    fit_body_regressor,
    interpolate_extremities,
    synthesize_clip,
    clip_to_json,
)
from betaboard.data import example_from_holds, holds_sequence_from_json, permute_augment, split_train_val
from betaboard.models.training import TrainConfig, train_loop
from betaboard.models.transformer import ARTConfig, ARTransformer
from betaboard.motion import Move, MoveSequence
from betaboard.pose import Extremity, load_landmark_stream

REPO = Path(__file__).resolve().parents[1]


def main() -> int:
    out_dir = REPO / "frontend" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    fixtures = REPO / "fixtures"
    manifest = json.loads((fixtures / "manifest.json").read_text())

    # clip: 3-move sequence animated with the fixture-fitted regressor
    frames = load_landmark_stream((fixtures / manifest["climber_stream"]).read_bytes(), "csv")
    reg = fit_body_regressor([frames])
    seq = MoveSequence(
        moves=(
            Move(x=0.3181818181818182, y=0.8055555555555556, limb=Extremity.LEFT_HAND, order_index=0),
            Move(x=0.5909090909090909, y=0.8055555555555556, limb=Extremity.RIGHT_HAND, order_index=1),
            Move(x=0.4090909090909091, y=0.4166666666666667, limb=Extremity.LEFT_HAND, order_index=2),
        )
    )
    traj = interpolate_extremities(seq, avg_frames_per_move=4)
    clip = synthesize_clip(traj, reg)
    (out_dir / "clip.json").write_bytes(clip_to_json(clip))

    # predict-order response: tiny deterministic model on the fixture sequences
    bases = []
    for i, name in enumerate(manifest["sequences"]):
        holds, order = holds_sequence_from_json((fixtures / "sequences" / name).read_bytes())
        bases.append(example_from_holds(holds, order, base_id=i))
    augmented = permute_augment(bases, 10, seed=0)
    train, val = split_train_val(augmented, 0.2, seed=0)
    model = ARTransformer(ARTConfig(max_len=17, d_model=16, n_heads=2, n_blocks=1, ff_dim=32, seed=7))
    train_loop(model, train, val, TrainConfig(epochs=5, lr=1e-3, batch_size=64, seed=7))

    holds, order = holds_sequence_from_json(
        (fixtures / "sequences" / manifest["sequences"][0]).read_bytes()
    )
    predicted = model.generate(holds)
    matches = sum(1 for a, b in zip(predicted, order) if a == b)
    request = {"holds": [[x, y] for x, y in holds], "model": "art", "order": order}
    response = {"order": predicted, "accuracy_vs_provided": matches / len(predicted)}
    (out_dir / "predict_request.json").write_text(json.dumps(request, separators=(",", ":")))
    (out_dir / "predict_response.json").write_text(json.dumps(response, separators=(",", ":")))

    print(f"wrote frontend fixtures to {out_dir}")
    print(f"  clip frames: {clip.frames_total}")
    print(f"  predicted order: {predicted}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
