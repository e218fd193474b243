"""Checkpoint container: versioned JSON with bit-exact float64 payloads.

Array data is stored as base64 of little-endian float64 bytes, so a
save/load round trip reproduces every parameter and optimizer moment
exactly.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .params import ParamStore

FORMAT_VERSION = 1


def _encode(arr: np.ndarray) -> dict:
    contiguous = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(contiguous.tobytes()).decode("ascii"),
    }


def _decode(rec: dict) -> np.ndarray:
    raw = base64.b64decode(rec["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(rec["shape"])


def save_checkpoint(path: str | Path, store: ParamStore, config: dict) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "config": config,
        "params": {name: _encode(p) for name, p in store.params.items()},
        "adam": {
            "m": {name: _encode(a) for name, a in store.m.items()},
            "v": {name: _encode(a) for name, a in store.v.items()},
            "t": store.t,
        },
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: str | Path) -> tuple[ParamStore, dict]:
    payload = json.loads(Path(path).read_text())
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version!r}")
    store = ParamStore()
    for name, rec in payload["params"].items():
        store.add(name, _decode(rec))
    for name, rec in payload["adam"]["m"].items():
        store.m[name] = _decode(rec)
    for name, rec in payload["adam"]["v"].items():
        store.v[name] = _decode(rec)
    store.t = int(payload["adam"]["t"])
    return store, payload["config"]
