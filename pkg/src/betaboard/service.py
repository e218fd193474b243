"""HTTP service exposing sequence storage, animation, and model inference.

Checkpoints and the body regressor are loaded once at startup and shared
read-only across requests; the store serializes its writes.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response

from . import animation as anim
from .data import holds_sentence
from .models.seq2seq import Seq2Seq, Seq2SeqConfig
from .models.transformer import ARTransformer, SimpleTransformer
from .motion import Extremity, Move, MoveSequence
from .nn import load_checkpoint
from .store import ProjectStore


class ModelRegistry:
    """Frozen model inventory built from checkpoint files."""

    def __init__(self):
        self.models: dict[str, object] = {}
        self.sources: dict[str, str] = {}

    def load(self, name: str, path: str | Path, vocabs: dict | None = None) -> None:
        store, config = load_checkpoint(path)
        kind = config["model"]
        if kind == "art":
            model = ARTransformer.from_config(config["model_config"])
        elif kind == "simple":
            model = SimpleTransformer.from_config(config["model_config"])
        elif kind == "seq2seq":
            from .data import Vocab

            extra = config["vocabs"] if vocabs is None else vocabs
            model = Seq2Seq(
                Seq2SeqConfig(**config["model_config"]),
                Vocab(id_to_word=tuple(extra["input"])),
                Vocab(id_to_word=tuple(extra["output"])),
            )
        else:
            raise ValueError(f"unknown model kind {kind!r} in checkpoint {path}")
        model.store = store
        self.models[name] = model
        self.sources[name] = str(path)


def _parse_move_sequence(payload: dict) -> MoveSequence:
    moves = []
    for i, rec in enumerate(payload["moves"]):
        try:
            moves.append(
                Move(
                    x=float(rec["x"]),
                    y=float(rec["y"]),
                    limb=Extremity.from_code(rec["limb"]),
                    order_index=int(rec.get("order_index", i)),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"moves[{i}]: {exc}")
    try:
        return MoveSequence(moves=tuple(moves))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def create_app(
    store_path: str | Path,
    regressor_path: str | Path | None = None,
    checkpoints: dict[str, str] | None = None,
) -> FastAPI:
    app = FastAPI(title="betaboard service")
    store = ProjectStore(store_path)
    registry = ModelRegistry()
    for name, path in (checkpoints or {}).items():
        registry.load(name, path)

    regressor = None
    if regressor_path is not None:
        regressor = anim.regressor_from_json(Path(regressor_path).read_bytes())

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def models():
        return {
            "models": [
                {"name": name, "checkpoint": registry.sources[name]}
                for name in sorted(registry.models)
            ]
        }

    @app.post("/sequences")
    async def post_sequence(request: Request):
        raw = await request.body()
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"body: invalid JSON ({exc})")
        if "moves" in payload:
            _parse_move_sequence(payload)
            kind = "moves"
        elif "holds" in payload:
            holds = payload["holds"]
            if not isinstance(holds, list) or not all(
                isinstance(h, list) and len(h) == 2 for h in holds
            ):
                raise HTTPException(status_code=400, detail="holds: expected [[x, y], ...]")
            order = payload.get("order")
            if order is not None and sorted(order) != list(range(len(holds))):
                raise HTTPException(
                    status_code=400, detail="order: must be a permutation of hold indices"
                )
            kind = "holds"
        else:
            raise HTTPException(status_code=400, detail="body: need 'moves' or 'holds'")
        item_id = store.put(kind, raw)
        return {"id": item_id}

    @app.get("/sequences/{item_id}")
    def get_sequence(item_id: str):
        entry = store.get(item_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no sequence {item_id}")
        _, payload = entry
        return Response(content=payload, media_type="application/json")

    @app.post("/animate")
    async def animate(request: Request):
        body = await request.json()
        seq_id = body.get("sequence_id")
        if seq_id is None:
            raise HTTPException(status_code=400, detail="sequence_id: required")
        entry = store.get(seq_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no sequence {seq_id}")
        kind, payload = entry
        if kind != "moves":
            raise HTTPException(status_code=400, detail="sequence_id: not a move sequence")
        if regressor is None:
            raise HTTPException(status_code=400, detail="no body regressor configured")
        seq = _parse_move_sequence(json.loads(payload))
        frames_per_move = int(body.get("frames_per_move", 120))
        if frames_per_move < 1:
            raise HTTPException(status_code=400, detail="frames_per_move: must be >= 1")
        traj = anim.interpolate_extremities(seq, avg_frames_per_move=frames_per_move)
        clip = anim.synthesize_clip(traj, regressor)
        return Response(content=anim.clip_to_json(clip), media_type="application/json")

    @app.post("/predict-order")
    async def predict_order(request: Request):
        body = await request.json()
        holds = body.get("holds")
        if not isinstance(holds, list) or len(holds) < 2:
            raise HTTPException(status_code=400, detail="holds: need at least 2 [x, y] pairs")
        model_name = body.get("model", "simple")
        model = registry.models.get(model_name)
        if model is None:
            raise HTTPException(status_code=404, detail=f"model {model_name!r} not loaded")
        coords = [(float(x), float(y)) for x, y in holds]
        if isinstance(model, ARTransformer):
            order = model.generate(coords)
        elif isinstance(model, SimpleTransformer):
            order = model.predict(coords)
        else:
            raise HTTPException(status_code=400, detail=f"model {model_name!r} cannot order holds")
        result = {"order": order}
        provided = body.get("order")
        if provided is not None and len(provided) == len(order):
            matches = sum(1 for a, b in zip(order, provided) if a == int(b))
            result["accuracy_vs_provided"] = matches / len(order)
        return result

    @app.post("/translate")
    async def translate(request: Request):
        body = await request.json()
        sentence = body.get("holds_sentence")
        if not isinstance(sentence, list):
            raise HTTPException(
                status_code=400, detail="holds_sentence: expected a list of words"
            )
        model = registry.models.get("seq2seq")
        if model is None:
            raise HTTPException(status_code=404, detail="model 'seq2seq' not loaded")
        return {"move_sentence": model.translate([str(w) for w in sentence])}

    return app


def holds_to_sentence(holds: list[tuple[float, float]]) -> list[str]:
    return holds_sentence(holds)
