"""On-disk project store: sequences, clips, and checkpoints addressed by id."""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path


class ProjectStore:
    """Directory of JSON artifacts with an index file.

    Writes are serialized with a lock; re-posting identical content yields
    the same id (ids are content hashes). Stored bytes round-trip exactly.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"
        self._lock = threading.Lock()
        if not self._index_path.exists():
            self._index_path.write_text("{}")

    def _read_index(self) -> dict:
        return json.loads(self._index_path.read_text())

    def put(self, kind: str, payload: bytes) -> str:
        item_id = hashlib.sha256(payload).hexdigest()[:12]
        with self._lock:
            path = self.root / f"{kind}_{item_id}.json"
            path.write_bytes(payload)
            index = self._read_index()
            index[item_id] = {"kind": kind, "file": path.name}
            self._index_path.write_text(json.dumps(index, indent=2))
        return item_id

    def get(self, item_id: str) -> tuple[str, bytes] | None:
        index = self._read_index()
        entry = index.get(item_id)
        if entry is None:
            return None
        path = self.root / entry["file"]
        if not path.exists():
            return None
        return entry["kind"], path.read_bytes()

    def list(self) -> dict:
        return self._read_index()
