"""Immutable graphs and the measurements used to certify them.

A :class:`Graph` is CSR adjacency with sorted neighbour rows.  Distances
use ``N`` (the order) as the unreachable sentinel.

Diameter has two modes.  ``exact`` runs BFS from every vertex (bit-parallel,
64 sources per machine word).  ``bounded`` is iFUB: BFS from a central root,
then from fringe vertices level by level until the lower bound beats the
upper bound ``2(i - 1)``; it stops with :class:`DiameterBudgetExceeded` once
its BFS budget is spent, reporting the bounds it has.
"""

from __future__ import annotations

import json
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "Acyclic",
    "Certificate",
    "DiameterBudgetExceeded",
    "Disconnected",
    "Graph",
    "NotBipartite",
    "SelfLoop",
    "VertexOutOfRange",
    "bfs_distances",
    "bipartite_moore_bound",
    "bipartition",
    "build_graph",
    "certify",
    "degree_stats",
    "diameter",
    "diameter_bfs_count",
    "disjoint_shortest_paths",
    "eccentricities",
    "girth",
    "moore_bound",
]

EXACT_LIMIT = 10_000
DEFAULT_BFS_BUDGET = 10_000

# provenance kinds for vertex labels
PLAIN, POINT, LINE, CLIQUE = 0, 1, 2, 3
_KIND_NAMES = {PLAIN: "v", POINT: "point", LINE: "line", CLIQUE: "clique"}


class VertexOutOfRange(ValueError):
    pass


class SelfLoop(ValueError):
    pass


class Disconnected(ValueError):
    pass


class Acyclic(ValueError):
    pass


class NotBipartite(ValueError):
    def __init__(self, cycle: list[int]):
        super().__init__(f"odd cycle of length {len(cycle)}: {cycle[:12]}")
        self.cycle = cycle


class DiameterBudgetExceeded(RuntimeError):
    def __init__(self, lower: int, upper: int, bfs_runs: int):
        super().__init__(f"BFS budget exhausted after {bfs_runs} runs with {lower} <= D <= {upper}")
        self.lower = lower
        self.upper = upper
        self.bfs_runs = bfs_runs


@dataclass(frozen=True, eq=False)
class Graph:
    indptr: np.ndarray
    indices: np.ndarray
    label_kind: np.ndarray | None = field(default=None, repr=False)
    label_ref: np.ndarray | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.indptr) - 1

    def __len__(self) -> int:
        return self.order

    @property
    def size(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < len(row) and row[i] == v

    def edges(self) -> np.ndarray:
        """Edge array of shape (M, 2) with u < v, sorted."""
        src = np.repeat(np.arange(self.order, dtype=np.int32), self.degrees)
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def label(self, v: int) -> str:
        if self.label_kind is None:
            return f"v{v}"
        kind = int(self.label_kind[v])
        ref = int(self.label_ref[v])
        if kind == CLIQUE:
            return f"clique{ref >> 8}.{ref & 0xFF}"
        return f"{_KIND_NAMES[kind]}{ref}"

    def same_as(self, other: "Graph") -> bool:
        return np.array_equal(self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)


def build_graph(edges: Iterable[Sequence[int]] | np.ndarray, n: int,
                label_kind: np.ndarray | None = None, label_ref: np.ndarray | None = None) -> Graph:
    """Symmetric CSR graph on ``n`` vertices; duplicate edges collapse."""
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if len(arr) and (arr.min() < 0 or arr.max() >= n):
        bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)][0]
        raise VertexOutOfRange(f"edge {tuple(bad)} has an endpoint outside [0, {n})")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise SelfLoop(f"self-loop at vertex {arr[loops][0, 0]}")
    both = np.concatenate([arr, arr[:, ::-1]])
    key = np.unique(both[:, 0] * n + both[:, 1])
    src = (key // n).astype(np.int32)
    dst = (key % n).astype(np.int32)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    for a in (indptr, dst):
        a.setflags(write=False)
    if label_kind is not None:
        label_kind = np.asarray(label_kind, dtype=np.uint8)
        label_ref = np.asarray(label_ref, dtype=np.int64)
    return Graph(indptr, dst, label_kind, label_ref)


def moore_bound(delta: int, diam: int) -> int:
    if delta == 2:
        return 2 * diam + 1
    return (delta * (delta - 1) ** diam - 2) // (delta - 2)


def bipartite_moore_bound(delta: int, diam: int) -> int:
    if delta == 2:
        return 2 * diam
    return 2 * ((delta - 1) ** diam - 1) // (delta - 2)


def bfs_distances(g: Graph, src: int) -> np.ndarray:
    if not 0 <= src < g.order:
        raise VertexOutOfRange(f"source {src} outside [0, {g.order})")
    return _kernels.bfs(g.indptr, g.indices, src, g.order)


def degree_stats(g: Graph) -> tuple[int, int, dict[int, int]]:
    deg = g.degrees
    if len(deg) == 0:
        return 0, 0, {}
    hist = Counter(int(d) for d in deg)
    return int(deg.min()), int(deg.max()), dict(sorted(hist.items()))


def eccentricities(g: Graph, sources: np.ndarray | None = None, batch: int | None = None) -> np.ndarray:
    """Exact eccentricity of every source.  Raises :class:`Disconnected`."""
    n = g.order
    if sources is None:
        sources = np.arange(n, dtype=np.int64)
    sources = np.asarray(sources, dtype=np.int64)
    if batch is None:
        # three n x words bitsets; stay well under a gigabyte
        words = max(1, min(64, (600_000_000 // (24 * max(n, 1)))))
        batch = 64 * words
    out = np.empty(len(sources), dtype=np.int32)
    for start in range(0, len(sources), batch):
        chunk = sources[start : start + batch]
        ecc, reached = _kernels.bitset_eccentricities(g.indptr, g.indices, chunk)
        if not reached.all():
            raise Disconnected(f"vertex {int(chunk[np.argmin(reached)])} does not reach every vertex")
        out[start : start + len(chunk)] = ecc
    return out


def _ecc_with_dist(g: Graph, v: int) -> tuple[int, np.ndarray]:
    dist = _kernels.bfs(g.indptr, g.indices, v, g.order)
    ecc = int(dist.max())
    if ecc >= g.order and g.order > 1:
        raise Disconnected(f"vertex {v} does not reach every vertex")
    return ecc, dist


def _path_midpoint(g: Graph, a: int, b: int, dist_a: np.ndarray) -> int:
    """A vertex halfway along a shortest a-b path (ties: smallest id)."""
    d = int(dist_a[b])
    v = b
    while dist_a[v] > d // 2:
        nb = g.neighbors(v)
        v = int(nb[dist_a[nb] == dist_a[v] - 1].min())
    return v


def _ifub(g: Graph, budget: int) -> tuple[int, int]:
    runs = 0
    lb, ub = 0, g.order - 1

    def run(v: int) -> tuple[int, np.ndarray]:
        nonlocal runs, lb, ub
        if runs >= budget:
            raise DiameterBudgetExceeded(lb, ub, runs)
        runs += 1
        ecc, dist = _ecc_with_dist(g, v)
        lb = max(lb, ecc)
        ub = min(ub, 2 * ecc)
        return ecc, dist

    # 4-sweep for a central root
    r1 = int(np.argmax(g.degrees))
    _, d1 = run(r1)
    a1 = int(np.argmax(d1))
    _, da1 = run(a1)
    r2 = _path_midpoint(g, a1, int(np.argmax(da1)), da1)
    _, d2 = run(r2)
    a2 = int(np.argmax(d2))
    _, da2 = run(a2)
    root = _path_midpoint(g, a2, int(np.argmax(da2)), da2)
    e_root, dist = run(root)
    # eccentricities of vertices at level <= i are bounded by 2i
    i = e_root
    while ub > lb and i > 0:
        for v in np.flatnonzero(dist == i):
            run(int(v))
        if lb > 2 * (i - 1):
            break
        ub = min(ub, 2 * (i - 1))
        i -= 1
    return lb, runs


def diameter(g: Graph, mode: str = "exact", budget: int = DEFAULT_BFS_BUDGET) -> tuple[int, str]:
    """Diameter of a connected graph as ``(value, method)``."""
    if g.order == 0:
        raise ValueError("empty graph")
    if g.order == 1:
        return 0, mode
    if mode == "exact":
        return int(eccentricities(g).max()), "exact"
    if mode == "bounded":
        value, _ = _ifub(g, budget)
        return value, "bounded"
    raise ValueError(f"unknown diameter mode {mode!r}")


def diameter_bfs_count(g: Graph, budget: int = DEFAULT_BFS_BUDGET) -> tuple[int, int]:
    """iFUB diameter together with the number of BFS runs it used."""
    return _ifub(g, budget)


def girth(g: Graph) -> int:
    value = int(_kernels.girth(g.indptr, g.indices))
    if value > g.order:
        raise Acyclic("graph has no cycle")
    return value


def bipartition(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Two colour classes, the class of vertex 0 first."""
    n = g.order
    color = np.full(n, -1, dtype=np.int8)
    parent = np.full(n, -1, dtype=np.int64)
    for root in range(n):
        if color[root] >= 0:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in g.neighbors(v):
                w = int(w)
                if color[w] < 0:
                    color[w] = 1 - color[v]
                    parent[w] = v
                    queue.append(w)
                elif color[w] == color[v]:
                    raise NotBipartite(_odd_cycle(parent, v, w))
    return np.flatnonzero(color == 0), np.flatnonzero(color == 1)


def _odd_cycle(parent: np.ndarray, v: int, w: int) -> list[int]:
    def chain(x: int) -> list[int]:
        out = [x]
        while parent[x] >= 0:
            x = int(parent[x])
            out.append(x)
        return out

    pv, pw = chain(v), chain(w)
    common = set(pv) & set(pw)
    pv = pv[: next(i for i, x in enumerate(pv) if x in common) + 1]
    pw = pw[: next(i for i, x in enumerate(pw) if x in common)]
    return pv + pw[::-1]


def disjoint_shortest_paths(g: Graph, u: int, v: int) -> int:
    """Maximum number of internally vertex-disjoint shortest u-v paths.

    Unit vertex capacities on the shortest-path DAG, augmenting paths found by
    BFS in the residual network.
    """
    if u == v:
        raise ValueError("endpoints must differ")
    du = bfs_distances(g, u)
    dv = bfs_distances(g, v)
    d = int(du[v])
    if d >= g.order:
        raise Disconnected(f"{u} and {v} are in different components")
    on = np.flatnonzero(du + dv == d)
    # node ids: vertex w -> (w_in = 2k, w_out = 2k + 1); u and v are uncapacitated
    pos = {int(w): k for k, w in enumerate(on)}
    cap: dict[tuple[int, int], int] = {}
    adj: dict[int, list[int]] = {}

    def arc(a: int, b: int, c: int) -> None:
        if (a, b) not in cap:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
            cap[(a, b)] = 0
            cap.setdefault((b, a), 0)
        cap[(a, b)] += c

    for w in on:
        w = int(w)
        k = pos[w]
        arc(2 * k, 2 * k + 1, len(on) if w in (u, v) else 1)
        for x in g.neighbors(w):
            x = int(x)
            if x in pos and du[x] == du[w] + 1:
                arc(2 * k + 1, 2 * pos[x], 1)
    source, sink = 2 * pos[u], 2 * pos[v] + 1
    flow = 0
    while True:
        prev = {source: source}
        queue = deque([source])
        while queue and sink not in prev:
            a = queue.popleft()
            for b in adj.get(a, ()):
                if b not in prev and cap[(a, b)] > 0:
                    prev[b] = a
                    queue.append(b)
        if sink not in prev:
            return flow
        b = sink
        while b != source:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1


@dataclass
class Certificate:
    order: int
    min_degree: int
    max_degree: int
    bipartite: bool
    side_sizes: tuple[int, int] | None
    girth: int | None
    diameter: int | None
    diameter_method: str | None
    elapsed_ms: dict[str, float] = field(default_factory=dict)
    bfs_runs: int | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out = {
            "order": self.order,
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "bipartite": self.bipartite,
            "girth": self.girth,
            "diameter": self.diameter,
            "diameter_method": self.diameter_method,
            "elapsed_ms": round(sum(self.elapsed_ms.values()), 3),
        }
        if self.note:
            out["note"] = self.note
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        return cls(order=data["order"], min_degree=data["min_degree"], max_degree=data["max_degree"],
                   bipartite=data["bipartite"], side_sizes=None, girth=data["girth"],
                   diameter=data["diameter"], diameter_method=data["diameter_method"],
                   elapsed_ms={"total": data.get("elapsed_ms", 0.0)}, note=data.get("note"))


def certify(g: Graph, mode: str | None = None, budget: int = DEFAULT_BFS_BUDGET,
            with_girth: bool = True, fallback_exact: bool = False, with_diameter: bool = True) -> Certificate:
    """Measure order, degrees, bipartiteness, girth and diameter.

    ``mode=None`` picks exact up to 10 000 vertices and bounded above.
    A bounded run that exhausts its budget propagates
    :class:`DiameterBudgetExceeded` unless ``fallback_exact`` is set, in
    which case the exact diameter is computed and the certificate notes the
    exhausted budget.
    """
    timings: dict[str, float] = {}

    def timed(name: str, fn, *args):
        t0 = time.perf_counter()
        out = fn(*args)
        timings[name] = (time.perf_counter() - t0) * 1e3
        return out

    lo, hi, _ = timed("degrees", degree_stats, g)
    try:
        a, b = timed("bipartition", bipartition, g)
        bip, sides = True, (len(a), len(b))
    except NotBipartite:
        bip, sides = False, None
    gval = None
    if with_girth:
        try:
            gval = timed("girth", girth, g)
        except Acyclic:
            gval = None
    if mode is None:
        mode = "exact" if g.order <= EXACT_LIMIT else "bounded"
    runs = None
    note = None
    if not with_diameter:
        dval, mode = None, None
    elif mode == "bounded":
        try:
            (dval, runs) = timed("diameter", _ifub, g, budget)
        except DiameterBudgetExceeded as exc:
            if not fallback_exact:
                raise
            note = f"bounded mode spent {exc.bfs_runs} BFS runs with {exc.lower} <= D <= {exc.upper}"
            mode = "exact"
            dval, _ = timed("diameter", diameter, g, "exact")
            runs = exc.bfs_runs + g.order
    else:
        dval, _ = timed("diameter", diameter, g, mode, budget)
        runs = g.order
    return Certificate(order=g.order, min_degree=lo, max_degree=hi, bipartite=bip, side_sizes=sides,
                       girth=gval, diameter=dval, diameter_method=mode, elapsed_ms=timings, bfs_runs=runs,
                       note=note)
