"""Compounding: replace vertices of a bipartite Moore graph by complete graphs.

Targets come from a breadth-first tree around a root vertex ``r``::

    r -> u_i -> w_ij -> x_ijk

with children always taken in ascending vertex order.  Each target ``x`` is
replaced by a clique ``K_h``.  Slot 0 of the clique reuses the id of ``x``
and the other ``h - 1`` slots get fresh ids appended after the host graph,
in target order.  The former edges of ``x`` and the new edges between
cliques are distributed over the slots so that no vertex exceeds the host
degree.

Conditions checked on the realized graph (clique ``K_ijk`` for target
``x_ijk``):

(a) every clique vertex keeps an edge to a former non-parent neighbour;
(b) cliques in the same block ``(i, j)`` are pairwise joined;
(c) every clique is joined to some clique of every other block ``(i, m)``;
(d) every clique vertex is joined to some clique of every other class ``o``;
(e) no vertex exceeds the host degree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

import numpy as np

from . import _kernels
from .graph import (
    CLIQUE,
    DEFAULT_BFS_BUDGET,
    PLAIN,
    Certificate,
    Graph,
    bipartite_moore_bound,
    build_graph,
    certify,
)
from .moore import build_Hq, build_Qq

__all__ = [
    "CertificationFailed",
    "ConditionsReport",
    "Infeasible",
    "NAMED",
    "NotMoore",
    "PlanGraphMismatch",
    "RangeExceedsDegree",
    "RangeSpec",
    "ReplacementPlan",
    "TreeIndex",
    "apply_plan",
    "block_distance_checks",
    "build_H3K3",
    "build_H4K4",
    "build_Q4K3",
    "check_conditions",
    "construct_named",
    "index_tree",
    "make_plan",
    "slot_balance",
]

DEFAULT_RETRIES = 64


class RangeExceedsDegree(ValueError):
    pass


class NotMoore(ValueError):
    pass


class Infeasible(ValueError):
    pass


class PlanGraphMismatch(ValueError):
    pass


class CertificationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class RangeSpec:
    I: int
    J: int
    K: int

    def __post_init__(self):
        for name in ("I", "J", "K"):
            if getattr(self, name) < 1:
                raise RangeExceedsDegree(f"{name} must be at least 1")

    def keys(self) -> Iterator[tuple[int, int, int]]:
        for i in range(self.I):
            for j in range(self.J):
                for k in range(self.K):
                    yield (i, j, k)

    @property
    def count(self) -> int:
        return self.I * self.J * self.K


@dataclass(frozen=True)
class TreeIndex:
    """Breadth-first indexing around ``root``.

    With ``depth == 3`` the targets are the ``x_ijk``; with ``depth == 2`` they
    are the ``w_ij`` themselves (stored under key ``(i, j, 0)``), which is what
    the quadrangle compound uses.
    """

    root: int
    ranges: RangeSpec
    depth: int
    delta: int
    u: tuple[int, ...]
    w: dict[tuple[int, int], int]
    x: dict[tuple[int, int, int], int]
    parent: dict[tuple[int, int, int], int]
    host_order: int
    neighbours: dict[tuple[int, int, int], tuple[int, ...]]

    def targets(self) -> list[tuple[tuple[int, int, int], int, int]]:
        return [(key, self.x[key], self.parent[key]) for key in sorted(self.x)]


def _moore_diameter(g: Graph) -> int:
    deg = g.degrees
    if g.order == 0 or deg.min() != deg.max() or deg[0] < 3:
        raise NotMoore("graph is not regular of degree >= 3")
    delta = int(deg[0])
    for d in (4, 6):
        if g.order == bipartite_moore_bound(delta, d):
            return d
    raise NotMoore(f"order {g.order} is not a bipartite Moore order for degree {delta} and D >= 4")


def index_tree(g: Graph, root: int, ranges: RangeSpec, depth: int = 3) -> TreeIndex:
    diam = _moore_diameter(g)
    delta = int(g.degrees[0])
    if depth not in (2, 3) or depth >= diam:
        raise NotMoore(f"cannot index depth {depth} in a graph of diameter {diam}")
    if ranges.I > delta or ranges.J > delta - 1 or ranges.K > delta - 1:
        raise RangeExceedsDegree(f"{ranges} exceeds degree {delta}")
    if depth == 2 and ranges.K != 1:
        raise RangeExceedsDegree("depth 2 indexing takes K = 1")
    if not 0 <= root < g.order:
        raise PlanGraphMismatch(f"root {root} outside the graph")
    u = tuple(int(v) for v in g.neighbors(root))
    w: dict[tuple[int, int], int] = {}
    x: dict[tuple[int, int, int], int] = {}
    parent: dict[tuple[int, int, int], int] = {}
    for i in range(ranges.I):
        kids = [int(v) for v in g.neighbors(u[i]) if v != root]
        for j in range(ranges.J):
            w[i, j] = kids[j]
            if depth == 2:
                x[i, j, 0] = kids[j]
                parent[i, j, 0] = u[i]
                continue
            grand = [int(v) for v in g.neighbors(kids[j]) if v != u[i]]
            for k in range(ranges.K):
                x[i, j, k] = grand[k]
                parent[i, j, k] = kids[j]
    verts = list(x.values())
    if len(set(verts)) != len(verts):
        raise NotMoore("indexed targets are not distinct")
    nbrs = {key: tuple(int(c) for c in g.neighbors(v)) for key, v in x.items()}
    return TreeIndex(root, ranges, depth, delta, u, w, x, parent, g.order, nbrs)


def slot_balance(delta: int, h: int, ranges: RangeSpec, use_d: bool = True) -> dict[str, int]:
    """External endpoint budget of one clique.

    Capacity is ``h (delta - h + 1)``; demand is the ``delta`` former edges
    plus one edge per other clique of the block, one per other block of the
    class and, with (d), one per clique vertex per other class.
    """
    if not 1 <= h < delta:
        raise Infeasible(f"clique size {h} must lie in [1, {delta})")
    capacity = h * (delta - h + 1)
    demand = delta + (ranges.K - 1) + (ranges.J - 1) + (h * (ranges.I - 1) if use_d else 0)
    surplus = capacity - demand
    if surplus < 0:
        raise Infeasible(f"demand {demand} exceeds capacity {capacity}")
    t = ranges.count
    return {"capacity": capacity, "demand": demand, "surplus": surplus,
            "cliques": t, "total_capacity": t * capacity, "total_demand": t * demand}


@dataclass
class ReplacementPlan:
    """Complete edge ledger for a compound.

    ``targets[t] = (key, vertex, parent)``; ``former[t]`` lists
    ``(neighbour, slot)`` for every former neighbour of target ``t``;
    ``links`` lists ``(t_a, slot_a, t_b, slot_b, kind)`` with kind one of
    ``b``, ``c``, ``d`` or ``x`` (free edge).
    """

    h: int
    delta: int
    base_order: int
    root: int
    ranges: RangeSpec
    depth: int
    use_d: bool
    seed: int
    targets: list[tuple[tuple[int, int, int], int, int]]
    former: list[list[tuple[int, int]]]
    links: list[tuple[int, int, int, int, str]] = field(default_factory=list)

    @property
    def cap(self) -> int:
        return self.delta - self.h + 1

    def vertex(self, t: int, slot: int) -> int:
        if slot == 0:
            return self.targets[t][1]
        return self.base_order + t * (self.h - 1) + slot - 1

    @property
    def order(self) -> int:
        return self.base_order + len(self.targets) * (self.h - 1)

    def loads(self) -> np.ndarray:
        """External edges per clique vertex, shape (targets, h)."""
        out = np.zeros((len(self.targets), self.h), dtype=np.int64)
        for t, rows in enumerate(self.former):
            for _, s in rows:
                out[t, s] += 1
        for ta, sa, tb, sb, _ in self.links:
            out[ta, sa] += 1
            out[tb, sb] += 1
        return out

    def to_json(self) -> dict:
        return {
            "h": self.h, "delta": self.delta, "base_order": self.base_order, "root": self.root,
            "ranges": [self.ranges.I, self.ranges.J, self.ranges.K], "depth": self.depth,
            "use_d": self.use_d, "seed": self.seed,
            "targets": [[list(k), v, p] for k, v, p in self.targets],
            "former": [[[a, s] for a, s in rows] for rows in self.former],
            "links": [list(l) for l in self.links],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "ReplacementPlan":
        return cls(
            h=data["h"], delta=data["delta"], base_order=data["base_order"], root=data["root"],
            ranges=RangeSpec(*data["ranges"]), depth=data["depth"], use_d=data["use_d"],
            seed=data["seed"],
            targets=[(tuple(k), v, p) for k, v, p in data["targets"]],
            former=[[(a, s) for a, s in rows] for rows in data["former"]],
            links=[(a, sa, b, sb, kind) for a, sa, b, sb, kind in data["links"]],
        )


def _block_links(targets, ranges: RangeSpec) -> list[tuple[int, int, str]]:
    """Clique pairs required by (b) and (c), as (t_a, t_b, kind)."""
    pos = {key: t for t, (key, _, _) in enumerate(targets)}
    out = []
    for i in range(ranges.I):
        for j in range(ranges.J):
            for k, l in combinations(range(ranges.K), 2):
                out.append((pos[i, j, k], pos[i, j, l], "b"))
    for i in range(ranges.I):
        for j, m in combinations(range(ranges.J), 2):
            for k in range(ranges.K):
                # round robin: K_ijk meets K_im((k + m - j) mod K)
                out.append((pos[i, j, k], pos[i, m, (k + m - j) % ranges.K], "c"))
    return out


def make_plan(ti: TreeIndex, h: int, seed: int = 0, use_d: bool = True) -> ReplacementPlan:
    """Deterministic edge assignment; ``seed`` permutes choices on retries.

    The parent edge goes to slot 0 and the remaining former edges are dealt
    round robin starting at slot 1.  Each required link then takes the least
    loaded slot (lowest slot on ties) at both ends.
    """
    delta = ti.delta
    ranges = ti.ranges
    if ti.depth != 3:
        raise Infeasible("block conditions need depth 3 indexing")
    slot_balance(delta, h, ranges, use_d)
    if h > delta - 1:
        raise Infeasible("every slot needs a non-parent former edge")
    n = ti.host_order
    rng = random.Random(seed) if seed else None
    targets = ti.targets()
    cap = delta - h + 1
    load = np.zeros((len(targets), h), dtype=np.int64)
    former: list[list[tuple[int, int]]] = []
    for t, (key, v, par) in enumerate(targets):
        kids = [c for c in ti.neighbours[key] if c != par]
        if rng is not None:
            rng.shuffle(kids)
        rows = [(par, 0)]
        rows += [(c, (m + 1) % h) for m, c in enumerate(kids)]
        for _, s in rows:
            load[t, s] += 1
        former.append(sorted(rows))

    def free_slot(t: int) -> int:
        row = load[t]
        s = int(np.argmin(row))
        if row[s] >= cap:
            raise Infeasible(f"clique {targets[t][0]} has no free slot")
        return s

    links: list[tuple[int, int, int, int, str]] = []

    def link(ta: int, tb: int, kind: str) -> None:
        sa, sb = free_slot(ta), free_slot(tb)
        load[ta, sa] += 1
        load[tb, sb] += 1
        links.append((ta, sa, tb, sb, kind))

    for ta, tb, kind in _block_links(targets, ranges):
        link(ta, tb, kind)
    if use_d and ranges.I > 1:
        per_class = ranges.J * ranges.K
        for i, o in combinations(range(ranges.I), 2):
            side_a = [t for t in range(i * per_class, (i + 1) * per_class) for _ in range(h)]
            side_b = [t for t in range(o * per_class, (o + 1) * per_class) for _ in range(h)]
            if rng is not None:
                shift = rng.randrange(per_class) * h
                side_b = side_b[shift:] + side_b[:shift]
            for ta, tb in zip(side_a, side_b):
                link(ta, tb, "d")
    return ReplacementPlan(h=h, delta=delta, base_order=n, root=ti.root, ranges=ranges, depth=ti.depth,
                           use_d=use_d, seed=seed, targets=targets, former=former, links=links)


def apply_plan(g: Graph, plan: ReplacementPlan) -> Graph:
    """Realize ``plan`` on ``g``; order grows by ``t (h - 1)``."""
    if not plan.targets:
        return g
    if plan.base_order != g.order:
        raise PlanGraphMismatch(f"plan expects order {plan.base_order}, graph has {g.order}")
    n = g.order
    h = plan.h
    tverts = np.array([v for _, v, _ in plan.targets], dtype=np.int64)
    if tverts.min() < 0 or tverts.max() >= n:
        raise PlanGraphMismatch("target outside the graph")
    for t, (key, v, par) in enumerate(plan.targets):
        got = sorted(a for a, _ in plan.former[t])
        if got != [int(c) for c in g.neighbors(v)]:
            raise PlanGraphMismatch(f"former neighbours of target {key} do not match vertex {v}")
        if not g.has_edge(v, par):
            raise PlanGraphMismatch(f"parent {par} is not adjacent to target {v}")
    mask = np.zeros(n, dtype=bool)
    mask[tverts] = True
    base = g.edges()
    base = base[~(mask[base[:, 0]] | mask[base[:, 1]])]
    vid = np.empty((len(plan.targets), h), dtype=np.int64)
    for t in range(len(plan.targets)):
        for s in range(h):
            vid[t, s] = plan.vertex(t, s)
    extra = []
    iu, ju = np.triu_indices(h, 1)
    for t in range(len(plan.targets)):
        extra.append(np.stack([vid[t, iu], vid[t, ju]], axis=1))
        rows = np.asarray(plan.former[t], dtype=np.int64).reshape(-1, 2)
        extra.append(np.stack([rows[:, 0], vid[t, rows[:, 1]]], axis=1))
    if plan.links:
        arr = np.array([(a, sa, b, sb) for a, sa, b, sb, _ in plan.links], dtype=np.int64)
        extra.append(np.stack([vid[arr[:, 0], arr[:, 1]], vid[arr[:, 2], arr[:, 3]]], axis=1))
    edges = np.concatenate([base] + extra)
    total = plan.order
    if g.label_kind is not None:
        kind = np.concatenate([g.label_kind, np.zeros(total - n, dtype=np.uint8)])
        ref = np.concatenate([g.label_ref, np.zeros(total - n, dtype=np.int64)])
    else:
        kind = np.full(total, PLAIN, dtype=np.uint8)
        ref = np.arange(total, dtype=np.int64)
    for t in range(len(plan.targets)):
        kind[vid[t]] = CLIQUE
        ref[vid[t]] = (t << 8) | np.arange(h)
    return build_graph(edges, total, kind, ref)


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    subject: str
    ok: bool
    evidence: str


@dataclass
class ConditionsReport:
    results: list[ConditionResult]
    skipped: tuple[str, ...] = ()

    def status(self, condition: str) -> str:
        if condition in self.skipped:
            return "skipped"
        rows = [r for r in self.results if r.condition == condition]
        if not rows:
            return "vacuous"
        return "pass" if all(r.ok for r in rows) else "fail"

    def passed(self, condition: str) -> bool:
        return self.status(condition) != "fail"

    @property
    def ok(self) -> bool:
        return all(self.passed(c) for c in "abcde")

    def failures(self) -> list[ConditionResult]:
        return [r for r in self.results if not r.ok]

    def summary(self) -> dict[str, str]:
        return {c: self.status(c) for c in "abcde"}

    def to_json(self) -> dict:
        return {"summary": self.summary(),
                "failures": [[r.condition, r.subject, r.evidence] for r in self.failures()]}


def check_conditions(g2: Graph, plan: ReplacementPlan, use_d: bool | None = None) -> ConditionsReport:
    """Evaluate (a) to (e) against the realized graph."""
    if use_d is None:
        use_d = plan.use_d
    h = plan.h
    nt = len(plan.targets)
    owner = np.full(g2.order, -1, dtype=np.int64)
    verts = [[plan.vertex(t, s) for s in range(h)] for t in range(nt)]
    for t in range(nt):
        owner[verts[t]] = t
    keys = [k for k, _, _ in plan.targets]
    results: list[ConditionResult] = []

    def name(t: int) -> str:
        return "K" + "".join(map(str, keys[t]))

    for t, (key, v, par) in enumerate(plan.targets):
        former = {a for a, _ in plan.former[t]} - {par}
        for s, x in enumerate(verts[t]):
            hit = [int(c) for c in g2.neighbors(x) if int(c) in former]
            results.append(ConditionResult("a", f"{name(t)}.{s}", bool(hit),
                                           f"edge {x}-{hit[0]}" if hit else f"vertex {x} has no former neighbour"))

    def joined(ta: int, pred) -> tuple[int, int] | None:
        for x in verts[ta]:
            for c in g2.neighbors(x):
                tb = owner[c]
                if tb >= 0 and tb != ta and pred(int(tb)):
                    return x, int(c)
        return None

    if plan.depth == 3:
        for ta, tb in combinations(range(nt), 2):
            if keys[ta][:2] == keys[tb][:2]:
                e = joined(ta, lambda x, tb=tb: x == tb)
                results.append(ConditionResult("b", f"{name(ta)}~{name(tb)}", e is not None,
                                               f"edge {e[0]}-{e[1]}" if e else "no edge"))
        for ta in range(nt):
            i, j, _ = keys[ta]
            for m in range(plan.ranges.J):
                if m == j:
                    continue
                e = joined(ta, lambda x, i=i, m=m: keys[x][0] == i and keys[x][1] == m)
                results.append(ConditionResult("c", f"{name(ta)}~block{i}{m}", e is not None,
                                               f"edge {e[0]}-{e[1]}" if e else "no edge"))
        if use_d:
            classes = sorted({k[0] for k in keys})
            for ta in range(nt):
                for s, x in enumerate(verts[ta]):
                    for o in classes:
                        if o == keys[ta][0]:
                            continue
                        hit = [int(c) for c in g2.neighbors(x) if owner[c] >= 0 and keys[owner[c]][0] == o]
                        results.append(ConditionResult("d", f"{name(ta)}.{s}~class{o}", bool(hit),
                                                       f"edge {x}-{hit[0]}" if hit else "no edge"))
    deg = g2.degrees
    for t in range(nt):
        worst = int(deg[verts[t]].max())
        results.append(ConditionResult("e", name(t), worst <= plan.delta, f"max degree {worst}"))
    touched = sorted({a for rows in plan.former for a, _ in rows})
    if touched:
        worst = int(deg[touched].max())
        results.append(ConditionResult("e", "former neighbours", worst <= plan.delta, f"max degree {worst}"))
    return ConditionsReport(results, () if use_d else ("d",))


def block_distance_checks(g2: Graph, plan: ReplacementPlan, sample: int = 64,
                          seed: int = 0) -> dict[str, int]:
    """Worst intra-block clique distance and worst sampled cross-block distance.

    Intra-block uses every clique vertex; cross-block samples up to ``sample``
    sources per class.
    """
    h = plan.h
    nt = len(plan.targets)
    keys = [k for k, _, _ in plan.targets]
    verts = np.array([[plan.vertex(t, s) for s in range(h)] for t in range(nt)], dtype=np.int64)
    intra = 0
    cross = 0
    rng = np.random.default_rng(seed)
    blocks = sorted({k[:2] for k in keys})
    for b in blocks:
        mine = [t for t in range(nt) if keys[t][:2] == b]
        if len(mine) > 1:
            mask = np.zeros(g2.order, dtype=np.bool_)
            mask[verts[mine].ravel()] = True
            far = _kernels.pair_distances_within(g2.indptr, g2.indices, verts[mine].ravel(), mask, 3)
            intra = max(intra, int(far.max()))
    for i in sorted({k[0] for k in keys}):
        cls = [t for t in range(nt) if keys[t][0] == i]
        srcs = verts[cls].ravel()
        if len(srcs) > sample:
            srcs = np.sort(rng.choice(srcs, sample, replace=False))
        for x in srcs:
            t = int(np.flatnonzero((verts == x).any(axis=1))[0])
            others = [u for u in cls if keys[u][1] != keys[t][1]]
            if not others:
                continue
            mask = np.zeros(g2.order, dtype=np.bool_)
            mask[verts[others].ravel()] = True
            far = _kernels.pair_distances_within(g2.indptr, g2.indices, np.array([x]), mask, 5)
            cross = max(cross, int(far[0]))
    return {"intra_block": intra, "cross_block": cross}


# name -> (q, h, (I, J, K), order from the published table)
NAMED: dict[str, tuple[int, int, tuple[int, int, int], int]] = {
    "H5K4": (5, 4, (1, 4, 4), 7860),
    "H7K6": (7, 6, (1, 6, 6), 39396),
    "H8K6": (8, 6, (2, 6, 5), 75198),
    "H9K6": (9, 6, (2, 8, 8), 133500),
    "H11K6": (11, 6, (3, 10, 10), 355812),
    "H13K7": (13, 7, (4, 12, 11), 806636),
}


@dataclass
class Compound:
    graph: Graph
    plan: ReplacementPlan
    report: ConditionsReport | None
    certificate: Certificate | None


def _construct(name: str, g: Graph | None = None, seed: int = 0) -> tuple[Graph, ReplacementPlan]:
    q, h, rng3, _ = NAMED[name]
    if g is None:
        g = build_Hq(q)
    ti = index_tree(g, 0, RangeSpec(*rng3))
    plan = make_plan(ti, h, seed=seed)
    return apply_plan(g, plan), plan


def construct_named(name: str, seed: int = 0, retries: int = DEFAULT_RETRIES, mode: str | None = None,
                    budget: int = DEFAULT_BFS_BUDGET, certify_diameter: bool = True,
                    host: Graph | None = None, fallback_exact: bool = False) -> Compound:
    """Build one of the named hexagon compounds and certify max degree and D = 6.

    Seeds ``seed, seed + 1, ...`` are tried in order until one certifies.
    ``mode`` is handed to :func:`certify` (``None``: exact up to 10 000
    vertices, bounded above).
    """
    if name not in NAMED:
        raise KeyError(f"unknown construction {name!r}; choose from {sorted(NAMED)}")
    q = NAMED[name][0]
    g = host if host is not None else build_Hq(q)
    last = None
    for s in range(seed, seed + max(1, retries)):
        g2, plan = _construct(name, g, s)
        report = check_conditions(g2, plan)
        if not certify_diameter:
            return Compound(g2, plan, report, certify(g2, with_girth=False, with_diameter=False))
        cert = certify(g2, mode, budget, with_girth=False, fallback_exact=fallback_exact)
        if cert.max_degree == q + 1 and cert.diameter == 6 and report.ok:
            return Compound(g2, plan, report, cert)
        last = cert
    raise CertificationFailed(f"{name}: no seed in [{seed}, {seed + retries}) certified; last {last.to_json()}")


# ---------------------------------------------------------------------------
# small compounds with searched edge arrangements


class _Arrangement:
    """Mutable port-to-slot assignment explored by local search.

    A port of a clique is one of its former edges or one end of a link.  The
    parent edge is pinned to slot 0; every slot keeps a non-parent former edge.
    """

    def __init__(self, g: Graph, ti: TreeIndex, h: int, pairs: list[tuple[int, int, str]],
                 rng: random.Random):
        self.g, self.ti, self.h, self.rng = g, ti, h, rng
        self.targets = ti.targets()
        self.cap = ti.delta - h + 1
        nt = len(self.targets)
        spare = [h * self.cap - ti.delta for _ in range(nt)]
        for ta, tb, _ in pairs:
            spare[ta] -= 1
            spare[tb] -= 1
        if min(spare, default=0) < 0:
            raise Infeasible("required links exceed clique capacity")
        self.links = [[ta, 0, tb, 0, kind] for ta, tb, kind in pairs]
        self.links += self._free_links(spare)
        # ports[t] = list of [kind, ref, slot]; kind "f" former neighbour, "l" link end
        self.ports: list[list[list]] = []
        for t, (key, v, par) in enumerate(self.targets):
            kids = [int(c) for c in g.neighbors(v) if c != par]
            ports = [["f", par, 0]] + [["f", c, -1] for c in kids]
            ports += [["l", (li, end), -1] for li, l in enumerate(self.links)
                      for end in (0, 1) if l[2 * end] == t]
            self._deal(ports)
            self.ports.append(ports)
        self._sync()

    def _free_links(self, spare: list[int]) -> list[list]:
        ends = [t for t, c in enumerate(spare) for _ in range(c)]
        if len(ends) % 2:
            ends.pop()
        for _ in range(10_000):
            self.rng.shuffle(ends)
            pairs = [(ends[2 * i], ends[2 * i + 1]) for i in range(len(ends) // 2)]
            if all(a != b for a, b in pairs):
                return [[min(a, b), 0, max(a, b), 0, "x"] for a, b in pairs]
        raise Infeasible("cannot pair free clique endpoints")

    def _deal(self, ports: list[list]) -> None:
        h, cap = self.h, self.cap
        load = [0] * h
        load[0] = 1
        kids = [p for p in ports[1:] if p[0] == "f"]
        rest = [p for p in ports[1:] if p[0] == "l"]
        self.rng.shuffle(kids)
        for s, p in enumerate(kids[:h]):
            p[2] = s
            load[s] += 1
        tail = kids[h:] + rest
        self.rng.shuffle(tail)
        for p in tail:
            open_ = [s for s in range(h) if load[s] < cap]
            s = self.rng.choice(open_)
            p[2] = s
            load[s] += 1

    def _sync(self) -> None:
        for t, ports in enumerate(self.ports):
            for kind, ref, slot in ports:
                if kind == "l":
                    li, end = ref
                    self.links[li][2 * end + 1] = slot

    def _valid(self, t: int) -> bool:
        slots = {slot for kind, ref, slot in self.ports[t][1:] if kind == "f"}
        return len(slots) == self.h

    def plan(self, seed: int, use_d: bool) -> ReplacementPlan:
        former = []
        for ports in self.ports:
            former.append(sorted((ref, slot) for kind, ref, slot in ports if kind == "f"))
        links = [tuple(l) for l in self.links]
        return ReplacementPlan(h=self.h, delta=self.ti.delta, base_order=self.g.order, root=self.ti.root,
                               ranges=self.ti.ranges, depth=self.ti.depth, use_d=use_d, seed=seed,
                               targets=self.targets, former=former, links=links)

    def mutate(self):
        """Apply a random move; return an undo callable or None if rejected."""
        rng = self.rng
        free = [li for li, l in enumerate(self.links) if l[4] == "x"]
        if len(free) >= 2 and rng.random() < 0.3:
            a, b = rng.sample(free, 2)
            la, lb = self.links[a], self.links[b]
            old = (list(la), list(lb))
            # exchange the second ends of the two free links
            if la[0] == lb[2] or lb[0] == la[2]:
                return None
            la[2:4], lb[2:4] = lb[2:4], la[2:4]
            self._reindex()

            def undo():
                self.links[a][:], self.links[b][:] = old
                self._reindex()
            return undo
        t = rng.randrange(len(self.ports))
        ports = self.ports[t]
        p, r = rng.sample(range(1, len(ports)), 2)
        if ports[p][2] == ports[r][2]:
            return None
        ports[p][2], ports[r][2] = ports[r][2], ports[p][2]
        if not self._valid(t):
            ports[p][2], ports[r][2] = ports[r][2], ports[p][2]
            return None
        self._sync()

        def undo():
            ports[p][2], ports[r][2] = ports[r][2], ports[p][2]
            self._sync()
        return undo

    def _reindex(self) -> None:
        for t, ports in enumerate(self.ports):
            for port in ports:
                if port[0] == "l":
                    port[0] = "drop"
            self.ports[t] = [p for p in ports if p[0] != "drop"]
        for li, l in enumerate(self.links):
            for end in (0, 1):
                self.ports[l[2 * end]].append(["l", (li, end), l[2 * end + 1]])


def _far_pairs(g2: Graph, diam: int) -> int:
    srcs = np.arange(g2.order, dtype=np.int64)
    return int(_kernels.far_pair_counts(g2.indptr, g2.indices, srcs, diam).sum())


def _search(g: Graph, ti: TreeIndex, h: int, diam: int, pairs: list[tuple[int, int, str]],
            seed: int, iterations: int) -> ReplacementPlan | None:
    arr = _Arrangement(g, ti, h, pairs, random.Random(seed))
    plan = arr.plan(seed, False)
    score = _far_pairs(apply_plan(g, plan), diam)
    for _ in range(iterations):
        if score == 0:
            return plan
        undo = arr.mutate()
        if undo is None:
            continue
        cand = arr.plan(seed, False)
        new = _far_pairs(apply_plan(g, cand), diam)
        if new <= score:
            score, plan = new, cand
        else:
            undo()
    return plan if score == 0 else None


def _searched(g: Graph, ti: TreeIndex, h: int, diam: int, pairs, seed: int, retries: int,
              iterations: int, label: str) -> Compound:
    for s in range(seed, seed + max(1, retries)):
        plan = _search(g, ti, h, diam, pairs, s, iterations)
        if plan is None:
            continue
        g2 = apply_plan(g, plan)
        cert = certify(g2, "exact")
        if cert.diameter == diam and cert.max_degree == ti.delta:
            report = check_conditions(g2, plan, use_d=False) if ti.depth == 3 else None
            return Compound(g2, plan, report, cert)
    raise CertificationFailed(f"{label}: no arrangement of diameter {diam} in seeds [{seed}, {seed + retries})")


def build_Q4K3(seed: int = 0, retries: int = DEFAULT_RETRIES, iterations: int = 2000) -> Compound:
    """Q_4 with 8 vertices at distance 2 from a root replaced by triangles: 186 vertices, D = 4."""
    g = build_Qq(4)
    ti = index_tree(g, 0, RangeSpec(4, 2, 1), depth=2)
    return _searched(g, ti, 3, 4, [], seed, retries, iterations, "Q4K3")


def _hexagon_small(q: int, h: int, ranges: RangeSpec, seed: int, retries: int, iterations: int,
                   label: str) -> Compound:
    g = build_Hq(q)
    ti = index_tree(g, 0, ranges)
    slot_balance(ti.delta, h, ranges, use_d=False)
    pairs = _block_links(ti.targets(), ranges)
    return _searched(g, ti, h, 6, pairs, seed, retries, iterations, label)


# layouts for the small hexagon compounds; both leave spare endpoints for links across classes
H3K3_RANGES = RangeSpec(3, 2, 1)
H4K4_RANGES = RangeSpec(2, 2, 2)


def build_H3K3(seed: int = 0, retries: int = DEFAULT_RETRIES, iterations: int = 2000) -> Compound:
    """H_3 with 6 vertices replaced by triangles, without condition (d): 740 vertices, D = 6."""
    return _hexagon_small(3, 3, H3K3_RANGES, seed, retries, iterations, "H3K3")


def build_H4K4(seed: int = 0, retries: int = DEFAULT_RETRIES, iterations: int = 2000) -> Compound:
    """H_4 with 8 vertices replaced by K_4, without condition (d): 2754 vertices, D = 6."""
    return _hexagon_small(4, 4, H4K4_RANGES, seed, retries, iterations, "H4K4")
