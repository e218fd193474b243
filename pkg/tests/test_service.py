import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from betaboard.animation import fit_body_regressor, regressor_to_json
from betaboard.data import example_from_holds
from betaboard.models.training import TrainConfig, train_loop
from betaboard.models.transformer import ARTConfig, ARTransformer, SimpleConfig, SimpleTransformer
from betaboard.pose import load_landmark_stream
from betaboard.service import create_app

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    fixture_pack = REPO_ROOT / "fixtures"
    if not fixture_pack.exists():
        pytest.skip("fixture pack missing")
    work = tmp_path_factory.mktemp("svc")
    manifest = json.loads((fixture_pack / "manifest.json").read_text())
    frames = load_landmark_stream(
        (fixture_pack / manifest["climber_stream"]).read_bytes(), "csv"
    )
    reg_path = work / "reg.json"
    reg_path.write_bytes(regressor_to_json(fit_body_regressor([frames])))

    examples = [
        example_from_holds([(0.2, 0.8), (0.5, 0.5), (0.7, 0.2), (0.4, 0.1)], [3, 1, 0, 2], base_id=i)
        for i in range(2)
    ]
    art = ARTransformer(ARTConfig(max_len=17, d_model=16, n_heads=2, n_blocks=1, ff_dim=32, seed=0))
    train_loop(art, examples, [], TrainConfig(epochs=2, batch_size=2, seed=0,
                                              checkpoint_path=str(work / "art.json")))
    simple = SimpleTransformer(SimpleConfig(max_len=17, d_model=16, n_heads=2, ff_dim=32, seed=0))
    train_loop(simple, examples, [], TrainConfig(epochs=2, batch_size=2, seed=0,
                                                 checkpoint_path=str(work / "simple.json")))

    app = create_app(
        work / "store",
        regressor_path=reg_path,
        checkpoints={"art": str(work / "art.json"), "simple": str(work / "simple.json")},
    )
    return TestClient(app)


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_models_inventory(client):
    names = {m["name"] for m in client.get("/models").json()["models"]}
    assert names == {"art", "simple"}


def test_sequence_round_trip_byte_identical(client):
    payload = b'{"moves": [{"x": 0.25, "y": 0.75, "limb": "LH", "order_index": 0}]}'
    r = client.post("/sequences", content=payload)
    assert r.status_code == 200
    item_id = r.json()["id"]
    got = client.get(f"/sequences/{item_id}")
    assert got.content == payload


def test_holds_sequence_round_trip(client):
    payload = b'{"holds": [[0.1, 0.9], [0.5, 0.5]], "order": [1, 0]}'
    item_id = client.post("/sequences", content=payload).json()["id"]
    assert client.get(f"/sequences/{item_id}").content == payload


def test_missing_sequence_404(client):
    assert client.get("/sequences/doesnotexist").status_code == 404


def test_malformed_sequence_400(client):
    r = client.post("/sequences", content=b'{"moves": [{"x": 0.5}]}')
    assert r.status_code == 400
    assert "moves[0]" in r.json()["detail"]
    assert client.post("/sequences", content=b"not json").status_code == 400
    assert client.post("/sequences", content=b'{"other": 1}').status_code == 400


def test_animate_contract(client):
    moves = {
        "moves": [
            {"x": 0.3, "y": 0.8, "limb": "LH", "order_index": 0},
            {"x": 0.6, "y": 0.6, "limb": "RH", "order_index": 1},
            {"x": 0.4, "y": 0.4, "limb": "LH", "order_index": 2},
        ]
    }
    seq_id = client.post("/sequences", json=moves).json()["id"]
    r = client.post("/animate", json={"sequence_id": seq_id, "frames_per_move": 9})
    assert r.status_code == 200
    clip = r.json()
    assert clip["fps"] == 30
    assert all(len(f["landmarks"]) == 33 for f in clip["frames"])
    # an n-move clip carries one initial frame plus the per-move segments
    assert len(clip["frames"]) >= 9


def test_animate_missing_sequence_404(client):
    assert client.post("/animate", json={"sequence_id": "nope"}).status_code == 404


def test_predict_order_contract(client):
    holds = [[0.2, 0.8], [0.5, 0.5], [0.7, 0.2], [0.4, 0.1], [0.9, 0.05]]
    for model in ("art", "simple"):
        r = client.post("/predict-order", json={"holds": holds, "model": model})
        assert r.status_code == 200
        order = r.json()["order"]
        assert len(order) == 5
        assert all(t in set(range(5)) | {17} for t in order)


def test_predict_order_deterministic(client):
    body = {"holds": [[0.2, 0.8], [0.5, 0.5], [0.7, 0.2]], "model": "art"}
    assert client.post("/predict-order", json=body).json() == client.post(
        "/predict-order", json=body
    ).json()


def test_predict_order_accuracy_vs_provided(client):
    body = {"holds": [[0.2, 0.8], [0.5, 0.5], [0.7, 0.2]], "model": "simple", "order": [2, 1, 0]}
    r = client.post("/predict-order", json=body).json()
    assert 0.0 <= r["accuracy_vs_provided"] <= 1.0


def test_predict_order_unknown_model_404(client):
    r = client.post("/predict-order", json={"holds": [[0.1, 0.1], [0.2, 0.2]], "model": "other"})
    assert r.status_code == 404


def test_translate_requires_model(client):
    r = client.post("/translate", json={"holds_sentence": ["0.2_0.3"]})
    assert r.status_code == 404  # seq2seq checkpoint not loaded in this app


def test_translate_with_loaded_model(tmp_path):
    from betaboard.data import Vocab
    from betaboard.models.seq2seq import Seq2Seq, Seq2SeqConfig
    from betaboard.nn import save_checkpoint

    iv = Vocab.from_words(["0.2_0.3"])
    ov = Vocab.from_words(["LH_0.2_0.3"])
    model = Seq2Seq(Seq2SeqConfig(hidden=8, seed=0), iv, ov)
    ckpt = tmp_path / "s2s.json"
    save_checkpoint(
        ckpt,
        model.store,
        {
            "model": "seq2seq",
            "model_config": model.config_dict(),
            "vocabs": {"input": list(iv.id_to_word), "output": list(ov.id_to_word)},
        },
    )
    app = create_app(tmp_path / "store", checkpoints={"seq2seq": str(ckpt)})
    local = TestClient(app)
    r = local.post("/translate", json={"holds_sentence": ["0.2_0.3"]})
    assert r.status_code == 200
    for word in r.json()["move_sentence"]:
        assert word.count("_") == 2
