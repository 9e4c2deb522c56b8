"""Graph serialization: edge list, DIMACS and graph6."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import Graph, build_graph

__all__ = [
    "FORMATS",
    "FormatUnsupported",
    "dumps",
    "format_for_path",
    "from_dimacs",
    "from_edgelist",
    "from_graph6",
    "loads",
    "read_graph",
    "to_dimacs",
    "to_edgelist",
    "to_graph6",
    "write_graph",
]

FORMATS = ("edgelist", "dimacs", "graph6")
_SUFFIXES = {".edges": "edgelist", ".el": "edgelist", ".txt": "edgelist",
             ".dimacs": "dimacs", ".col": "dimacs", ".g6": "graph6"}
# the dense bitmap of a larger graph would not fit comfortably in memory
GRAPH6_MAX_ORDER = 20_000


class FormatUnsupported(ValueError):
    pass


def to_edgelist(g: Graph) -> str:
    """``# vertices N`` header, then one ``u v`` line per edge (u < v, ascending)."""
    e = g.edges()
    body = "\n".join(f"{u} {v}" for u, v in e.tolist())
    return f"# vertices {g.order}\n" + (body + "\n" if body else "")


def from_edgelist(text: str) -> Graph:
    n = None
    pairs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "vertices":
                n = int(parts[1])
            continue
        u, v = line.split()[:2]
        pairs.append((int(u), int(v)))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(arr.max()) + 1 if len(arr) else 0
    return build_graph(arr, n)


def to_dimacs(g: Graph) -> str:
    e = g.edges() + 1
    lines = [f"p edge {g.order} {len(e)}"] + [f"e {u} {v}" for u, v in e.tolist()]
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> Graph:
    n = None
    pairs = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            n = int(parts[2])
        elif parts[0] == "e":
            pairs.append((int(parts[1]) - 1, int(parts[2]) - 1))
        else:
            raise FormatUnsupported(f"unexpected DIMACS line {line!r}")
    if n is None:
        raise FormatUnsupported("DIMACS input lacks a 'p edge' line")
    return build_graph(np.array(pairs, dtype=np.int64).reshape(-1, 2), n)


def _g6_size(n: int) -> bytes:
    if n < 63:
        return bytes([n + 63])
    if n < 258048:
        return bytes([126] + [((n >> s) & 63) + 63 for s in (12, 6, 0)])
    return bytes([126, 126] + [((n >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)])


def to_graph6(g: Graph) -> str:
    """Upper triangle read column by column, six bits per printable byte."""
    n = g.order
    if n > GRAPH6_MAX_ORDER:
        raise FormatUnsupported(f"graph6 export is limited to {GRAPH6_MAX_ORDER} vertices")
    total = n * (n - 1) // 2
    bits = np.zeros(-(-total // 6) * 6, dtype=np.uint8)
    e = g.edges().astype(np.int64)
    bits[e[:, 1] * (e[:, 1] - 1) // 2 + e[:, 0]] = 1
    weights = np.array([32, 16, 8, 4, 2, 1], dtype=np.uint8)
    body = (bits.reshape(-1, 6) @ weights + 63).astype(np.uint8)
    return (_g6_size(n) + body.tobytes()).decode("ascii")


def from_graph6(text: str) -> Graph:
    data = text.strip().encode("ascii")
    if data.startswith(b">>graph6<<"):
        data = data[10:]
    if not data or data[0] == ord(":") or data[0] == ord(";"):
        raise FormatUnsupported("sparse6/digraph6 input is not supported")
    if data[0] != 126:
        n, rest = data[0] - 63, data[1:]
    elif data[1] != 126:
        n = sum((c - 63) << s for c, s in zip(data[1:4], (12, 6, 0)))
        rest = data[4:]
    else:
        n = sum((c - 63) << s for c, s in zip(data[2:8], (30, 24, 18, 12, 6, 0)))
        rest = data[8:]
    total = n * (n - 1) // 2
    vals = np.frombuffer(rest, dtype=np.uint8).astype(np.int64) - 63
    if len(vals) != -(-total // 6) or (len(vals) and (vals.min() < 0 or vals.max() > 63)):
        raise FormatUnsupported("malformed graph6 body")
    bits = ((vals[:, None] >> np.arange(5, -1, -1)) & 1).ravel()[:total]
    pos = np.flatnonzero(bits)
    # column j holds positions j(j-1)/2 .. j(j+1)/2 - 1
    starts = np.arange(n, dtype=np.int64) * (np.arange(n, dtype=np.int64) - 1) // 2
    j = np.searchsorted(starts, pos, side="right") - 1
    i = pos - starts[j]
    return build_graph(np.stack([i, j], axis=1), n)


_WRITERS = {"edgelist": to_edgelist, "dimacs": to_dimacs, "graph6": to_graph6}
_READERS = {"edgelist": from_edgelist, "dimacs": from_dimacs, "graph6": from_graph6}


def dumps(g: Graph, fmt: str) -> str:
    if fmt not in _WRITERS:
        raise FormatUnsupported(f"unknown format {fmt!r}; choose from {FORMATS}")
    out = _WRITERS[fmt](g)
    return out if out.endswith("\n") else out + "\n"


def loads(text: str, fmt: str) -> Graph:
    if fmt not in _READERS:
        raise FormatUnsupported(f"unknown format {fmt!r}; choose from {FORMATS}")
    return _READERS[fmt](text)


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in _SUFFIXES:
        raise FormatUnsupported(f"cannot infer a graph format from {str(path)!r}")
    return _SUFFIXES[suffix]


def write_graph(g: Graph, path: str | Path, fmt: str | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps(g, fmt or format_for_path(path)))
    return path


def read_graph(path: str | Path, fmt: str | None = None) -> Graph:
    path = Path(path)
    fmt = fmt or format_for_path(path)
    return loads(path.read_text(), fmt)
