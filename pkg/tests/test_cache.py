import pytest

from ddgraphs.cache import CacheCorrupt, GraphCache
from ddgraphs.moore import build_Hq


def test_put_get(tmp_path):
    cache = GraphCache(tmp_path)
    g = build_Hq(2)
    key = cache.key("gh", 2)
    assert cache.get(key) is None
    cache.put(key, g, {"note": "x"})
    back, meta = cache.get(key)
    assert back.same_as(g) and meta == {"note": "x"}
    assert back.label(0) == g.label(0)


def test_checksum_detects_tampering(tmp_path):
    cache = GraphCache(tmp_path)
    key = cache.key("gh", 2)
    cache.put(key, build_Hq(2))
    path = tmp_path / f"{key}.npz"
    raw = bytearray(path.read_bytes())
    raw[-20] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheCorrupt):
        cache.get(key)
