"""Bipartite Moore graphs: incidence graphs of PG(2, q), Q(4, q) and H(q)."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field import make_field
from .geometry import LineSet, QuadraticForm, hexagon_lines, lines_on_quadric, plane_lines
from .graph import LINE, POINT, Certificate, Graph, bipartite_moore_bound, build_graph, certify

__all__ = [
    "MooreFamily",
    "UnknownPoint",
    "ValidationFailed",
    "build_Hq",
    "build_Pq",
    "build_Qq",
    "build_incidence_graph",
    "build_moore",
    "validate_moore",
]


class UnknownPoint(ValueError):
    pass


class ValidationFailed(AssertionError):
    pass


class MooreFamily(enum.Enum):
    PLANE = 3
    QUADRANGLE = 4
    HEXAGON = 6

    @property
    def diameter(self) -> int:
        return self.value

    def expected_order(self, q: int) -> int:
        return 2 * (q**self.value - 1) // (q - 1)


@dataclass(frozen=True)
class _Incidence:
    n_points: int
    rows: np.ndarray


def build_incidence_graph(points: int | Sequence, lines: LineSet | Sequence[Sequence[int]]) -> Graph:
    """Points are vertices ``0..P-1``, lines follow in their given order."""
    n_points = points if isinstance(points, int) else len(points)
    rows = lines.incidence if isinstance(lines, LineSet) else [list(r) for r in lines]
    n_lines = len(rows)
    edges = []
    for j, row in enumerate(rows):
        row = np.asarray(row, dtype=np.int64)
        if len(row) and (row.min() < 0 or row.max() >= n_points):
            raise UnknownPoint(f"line {j} mentions a point outside [0, {n_points})")
        edges.append(np.stack([row, np.full(len(row), n_points + j)], axis=1))
    edge_arr = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
    n = n_points + n_lines
    kind = np.concatenate([np.full(n_points, POINT), np.full(n_lines, LINE)])
    ref = np.concatenate([np.arange(n_points), np.arange(n_lines)])
    return build_graph(edge_arr, n, kind, ref)


def build_Pq(q: int) -> Graph:
    """Incidence graph of PG(2, q): order 2(q^2 + q + 1), girth 6, diameter 3."""
    pts, lines = plane_lines(make_field(q))
    return build_incidence_graph(len(pts), lines)


def build_Qq(q: int) -> Graph:
    """Incidence graph of the generalized quadrangle Q(4, q)."""
    lines = lines_on_quadric(QuadraticForm.parabolic(4), make_field(q))
    return build_incidence_graph(len(lines.points), lines)


def build_Hq(q: int) -> Graph:
    """Incidence graph of the split Cayley hexagon H(q)."""
    lines = hexagon_lines(make_field(q))
    return build_incidence_graph(len(lines.points), lines)


_BUILDERS = {MooreFamily.PLANE: build_Pq, MooreFamily.QUADRANGLE: build_Qq, MooreFamily.HEXAGON: build_Hq}


def build_moore(family: MooreFamily, q: int) -> Graph:
    return _BUILDERS[family](q)


def validate_moore(g: Graph, q: int, diam: int, mode: str | None = "exact") -> Certificate:
    """Certify that ``g`` is a bipartite Moore graph of degree q+1 and diameter ``diam``."""
    delta = q + 1
    if delta < 3:
        raise ValidationFailed(f"degree {delta} is too small for a bipartite Moore graph")
    expected = bipartite_moore_bound(delta, diam)
    if g.order != expected:
        raise ValidationFailed(f"order {g.order} != bipartite Moore bound {expected}")
    deg = g.degrees
    if not (deg == delta).all():
        v = int(np.flatnonzero(deg != delta)[0])
        raise ValidationFailed(f"vertex {v} has degree {int(deg[v])}, expected {delta}")
    cert = certify(g, mode)
    if not cert.bipartite:
        raise ValidationFailed("graph is not bipartite")
    if cert.girth != 2 * diam:
        raise ValidationFailed(f"girth {cert.girth} != {2 * diam}")
    if cert.diameter != diam:
        raise ValidationFailed(f"diameter {cert.diameter} != {diam}")
    return cert
