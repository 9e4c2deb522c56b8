"""On-disk cache of built graphs, checksummed and guarded by a file lock."""

from __future__ import annotations

import hashlib
import io
import json
import os
from pathlib import Path

import numpy as np
from filelock import FileLock

from .graph import Graph

__all__ = ["CacheCorrupt", "GraphCache", "default_cache_dir"]

# bump when geometry or construction choices change the produced graphs
CACHE_VERSION = 1


class CacheCorrupt(RuntimeError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get("DDGRAPHS_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "ddgraphs"


def _graph_bytes(g: Graph) -> bytes:
    buf = io.BytesIO()
    arrays = {"indptr": g.indptr, "indices": g.indices}
    if g.label_kind is not None:
        arrays["label_kind"] = g.label_kind
        arrays["label_ref"] = g.label_ref
    np.savez(buf, **arrays)
    return buf.getvalue()


class GraphCache:
    """Entries are ``<key>.npz`` plus ``<key>.json``; the JSON holds the npz checksum."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def key(self, *parts) -> str:
        return "-".join(str(p) for p in parts) + f"-v{CACHE_VERSION}"

    def _paths(self, key: str) -> tuple[Path, Path, Path]:
        return self.root / f"{key}.npz", self.root / f"{key}.json", self.root / f"{key}.lock"

    def get(self, key: str) -> tuple[Graph, dict] | None:
        """Cached graph and metadata, or None.  Raises :class:`CacheCorrupt` on a bad checksum."""
        data_path, meta_path, lock_path = self._paths(key)
        if not meta_path.exists() or not data_path.exists():
            return None
        with FileLock(str(lock_path)):
            meta = json.loads(meta_path.read_text())
            raw = data_path.read_bytes()
        digest = hashlib.sha256(raw).hexdigest()
        if digest != meta.get("sha256"):
            raise CacheCorrupt(f"cache entry {key} fails its checksum")
        with np.load(io.BytesIO(raw)) as z:
            kind = z["label_kind"] if "label_kind" in z else None
            ref = z["label_ref"] if "label_ref" in z else None
            g = Graph(z["indptr"], z["indices"], kind, ref)
        return g, meta.get("meta", {})

    def put(self, key: str, g: Graph, meta: dict | None = None) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        data_path, meta_path, lock_path = self._paths(key)
        raw = _graph_bytes(g)
        record = {"sha256": hashlib.sha256(raw).hexdigest(), "order": g.order, "meta": meta or {}}
        with FileLock(str(lock_path)):
            tmp = data_path.with_suffix(".npz.tmp")
            tmp.write_bytes(raw)
            os.replace(tmp, data_path)
            tmp = meta_path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(record, sort_keys=True))
            os.replace(tmp, meta_path)
