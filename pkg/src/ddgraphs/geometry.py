"""Points and lines of PG(n, q) and of the parabolic quadrics Q(4, q), Q(6, q).

Point sets are stored as integer coordinate arrays (one row per point,
normalised so the first nonzero coordinate is 1) in lexicographic order.
Each point also has an integer key, its coordinates read as a base-q
number, which is strictly increasing along the array and is what lookups
use.

Lines are stored as rows of sorted point indices.  A line's canonical basis
is its two smallest points, and line sets are sorted lexicographically by
their point rows, so numbering is reproducible run to run.

The generalized hexagon is the split Cayley hexagon H(q): all points of
Q(6, q), and those quadric lines whose Pluecker coordinates satisfy six
linear equations.  The equations below are written for the quadric
``x3^2 + x0 x4 + x1 x5 + x2 x6 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numba
import numpy as np

from .field import FieldSpec

__all__ = [
    "GeometryLine",
    "LineSet",
    "PointSet",
    "QuadraticForm",
    "SelectionInvalid",
    "HEXAGON_EQUATIONS",
    "enumerate_projective_points",
    "hexagon_lines",
    "lines_on_quadric",
    "normalize",
    "plane_lines",
    "plucker",
    "quadric_points",
]


class SelectionInvalid(RuntimeError):
    """The hexagon line equations did not produce a valid generalized hexagon."""


# (a, b, c, d, sign): p_ab + sign * p_cd == 0, with p_ij = x_i y_j - x_j y_i
HEXAGON_EQUATIONS: tuple[tuple[int, int, int, int, int], ...] = (
    (1, 2, 3, 4, 1),
    (5, 4, 3, 2, -1),
    (2, 0, 3, 5, 1),
    (6, 5, 3, 0, -1),
    (0, 1, 3, 6, 1),
    (4, 6, 3, 1, -1),
)


@dataclass(frozen=True)
class QuadraticForm:
    """A parabolic quadratic form on GF(q)^(dimension + 1).

    ``square`` is the coordinate that appears squared; ``pairs`` are the
    hyperbolic pairs ``x_i x_j``.
    """

    dimension: int
    square: int
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def parabolic(cls, dimension: int) -> "QuadraticForm":
        if dimension == 4:
            return cls(4, 0, ((1, 2), (3, 4)))
        if dimension == 6:
            return cls(6, 3, ((0, 4), (1, 5), (2, 6)))
        raise ValueError(f"no parabolic form for dimension {dimension}")

    def evaluate(self, spec: FieldSpec, coords: np.ndarray) -> np.ndarray:
        """Form value of every row of ``coords``."""
        add, mul = spec.add_table, spec.mul_table
        c = np.asarray(coords)
        out = mul[c[..., self.square], c[..., self.square]]
        for i, j in self.pairs:
            out = add[out, mul[c[..., i], c[..., j]]]
        return out

    def polar(self, spec: FieldSpec, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Associated bilinear form B(x, y) = Q(x + y) - Q(x) - Q(y) against each row of ``ys``."""
        add, mul = spec.add_table, spec.mul_table
        s = self.square
        two_x = add[x[s], x[s]]
        out = mul[two_x, ys[..., s]]
        for i, j in self.pairs:
            out = add[out, mul[x[i], ys[..., j]]]
            out = add[out, mul[x[j], ys[..., i]]]
        return out


@dataclass(frozen=True, eq=False)
class PointSet:
    """Normalised projective points in lexicographic order."""

    spec: FieldSpec
    coords: np.ndarray
    keys: np.ndarray

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coords[i])

    def index_of(self, coords: np.ndarray) -> np.ndarray:
        """Indices of (already normalised) coordinate rows; -1 where absent."""
        keys = encode(np.atleast_2d(coords), self.spec.q)
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        found = self.keys[pos] == keys
        return np.where(found, pos, -1)


@dataclass(frozen=True)
class GeometryLine:
    basis: tuple[int, int]
    points: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class LineSet:
    """Lines as rows of sorted point indices into ``points``."""

    points: PointSet
    incidence: np.ndarray

    def __len__(self) -> int:
        return len(self.incidence)

    def __getitem__(self, i: int) -> GeometryLine:
        row = tuple(int(v) for v in self.incidence[i])
        return GeometryLine(basis=(row[0], row[1]), points=row)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @cached_property
    def point_degrees(self) -> np.ndarray:
        return np.bincount(self.incidence.ravel(), minlength=len(self.points))


def encode(coords: np.ndarray, q: int) -> np.ndarray:
    weights = q ** np.arange(coords.shape[-1] - 1, -1, -1, dtype=np.int64)
    return coords.astype(np.int64) @ weights


def normalize(spec: FieldSpec, coords: np.ndarray) -> np.ndarray:
    """Scale each row so its first nonzero entry is 1.  Zero rows raise."""
    c = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    nz = c != 0
    if not nz.any(axis=1).all():
        raise ValueError("the zero vector is not a projective point")
    lead = c[np.arange(len(c)), nz.argmax(axis=1)]
    scale = spec.inv_table[lead].astype(np.int64)
    return spec.mul_table[scale[:, None], c].astype(np.int64)


def enumerate_projective_points(n: int, spec: FieldSpec) -> PointSet:
    """All (q^(n+1) - 1)/(q - 1) points of PG(n, q), lexicographically."""
    q = spec.q
    blocks = []
    for lead in range(n, -1, -1):
        free = n - lead
        tail = np.indices((q,) * free).reshape(free, -1).T if free else np.zeros((1, 0), dtype=np.int64)
        block = np.zeros((len(tail), n + 1), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1 :] = tail
        blocks.append(block)
    coords = np.concatenate(blocks)
    dtype = np.uint8 if q < 256 else np.int32
    coords = coords.astype(dtype)
    keys = encode(coords, q)
    coords.setflags(write=False)
    keys.setflags(write=False)
    return PointSet(spec, coords, keys)


def quadric_points(form: QuadraticForm, spec: FieldSpec) -> PointSet:
    allpts = enumerate_projective_points(form.dimension, spec)
    on = form.evaluate(spec, allpts.coords) == 0
    coords = np.ascontiguousarray(allpts.coords[on])
    keys = np.ascontiguousarray(allpts.keys[on])
    coords.setflags(write=False)
    keys.setflags(write=False)
    return PointSet(spec, coords, keys)


def _line_points(spec: FieldSpec, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """For each direction y, the q+1 points of the line <x, y> as coordinate rows.

    Returns an array of shape (len(ys), q + 1, dim) holding y + s x for every
    s in GF(q), followed by x itself.
    """
    q = spec.q
    add, mul = spec.add_table, spec.mul_table
    s = np.arange(q)
    sx = mul[s[:, None], x[None, :]]                      # (q, dim)
    pts = add[ys[:, None, :], sx[None, :, :]]             # (m, q, dim)
    xs = np.broadcast_to(x, (len(ys), 1, len(x)))
    return np.concatenate([pts, xs], axis=1)


def _canonical_lines(points: PointSet, rows: list[np.ndarray]) -> LineSet:
    if rows:
        inc = np.unique(np.sort(np.concatenate(rows), axis=1), axis=0).astype(np.int32)
    else:
        inc = np.zeros((0, points.spec.q + 1), dtype=np.int32)
    inc.setflags(write=False)
    return LineSet(points, inc)


def lines_on_quadric(form: QuadraticForm, spec: FieldSpec) -> LineSet:
    """Every line contained in the quadric (exhaustive; meant for small q)."""
    pts = quadric_points(form, spec)
    coords = pts.coords.astype(np.int64)
    rows = []
    for i, x in enumerate(coords):
        perp = np.flatnonzero(form.polar(spec, x, coords) == 0)
        perp = perp[perp > i]
        if len(perp) == 0:
            continue
        lp = _line_points(spec, x, coords[perp])
        idx = pts.index_of(normalize(spec, lp.reshape(-1, lp.shape[-1]))).reshape(lp.shape[:2])
        # every point of <x, y> must be singular; Q(x) = Q(y) = B(x, y) = 0 guarantees it
        assert (idx >= 0).all()
        # keep each line once: from its smallest point
        keep = idx.min(axis=1) == i
        rows.append(idx[keep])
    return _canonical_lines(pts, rows)


def plane_lines(spec: FieldSpec) -> tuple[PointSet, LineSet]:
    """Points and lines of PG(2, q); line [a] contains the points with a . x = 0."""
    pts = enumerate_projective_points(2, spec)
    coords = pts.coords.astype(np.int64)
    add, mul = spec.add_table, spec.mul_table
    rows = []
    for a in coords:
        dot = mul[a[0], coords[:, 0]]
        for k in (1, 2):
            dot = add[dot, mul[a[k], coords[:, k]]]
        rows.append(np.flatnonzero(dot == 0))
    inc = np.array(rows, dtype=np.int32)
    inc.setflags(write=False)
    return pts, LineSet(pts, inc)


def plucker(spec: FieldSpec, x: np.ndarray, y: np.ndarray) -> tuple[int, ...]:
    """Normalised Pluecker vector (p_ij for i < j) of the line spanned by x and y."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    mul, add, neg = spec.mul_table, spec.add_table, spec.neg_table
    comps = [add[mul[x[i], y[j]], neg[mul[x[j], y[i]]]] for i, j in combinations(range(len(x)), 2)]
    return tuple(int(v) for v in normalize(spec, np.array(comps))[0])


def plucker_satisfies_hexagon(spec: FieldSpec, x: np.ndarray, y: np.ndarray) -> bool:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    mul, add, neg = spec.mul_table, spec.add_table, spec.neg_table

    def p(i: int, j: int) -> int:
        return int(add[mul[x[i], y[j]], neg[mul[x[j], y[i]]]])

    for a, b, c, d, sign in HEXAGON_EQUATIONS:
        rhs = p(c, d) if sign > 0 else int(neg[p(c, d)])
        if add[p(a, b), rhs] != 0:
            return False
    return True


def _hexagon_system() -> np.ndarray:
    """Coefficient pattern: for each equation the (x-index, y-index, sign) terms."""
    terms = []
    for a, b, c, d, sign in HEXAGON_EQUATIONS:
        # p_ab + sign p_cd = x_a y_b - x_b y_a + sign (x_c y_d - x_d y_c)
        terms.append([(a, b, 1), (b, a, -1), (c, d, sign), (d, c, -sign)])
    return np.array(terms, dtype=np.int64)


@numba.njit(cache=True)
def _rref(mat, add, mul, neg, inv, pivcol):
    """Row-reduce ``mat`` in place over GF(q); returns the rank."""
    rows, cols = mat.shape
    rank = 0
    for col in range(cols):
        piv = -1
        for r in range(rank, rows):
            if mat[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        for k in range(cols):
            tmp = mat[rank, k]
            mat[rank, k] = mat[piv, k]
            mat[piv, k] = tmp
        s = inv[mat[rank, col]]
        for k in range(cols):
            mat[rank, k] = mul[s, mat[rank, k]]
        for r in range(rows):
            if r != rank and mat[r, col] != 0:
                f = neg[mat[r, col]]
                for k in range(cols):
                    mat[r, k] = add[mat[r, k], mul[f, mat[rank, k]]]
        pivcol[rank] = col
        rank += 1
        if rank == rows:
            break
    return rank


@numba.njit(cache=True)
def _form_value(y, square, pairs, add, mul):
    out = mul[y[square], y[square]]
    for t in range(pairs.shape[0]):
        out = add[out, mul[y[pairs[t, 0]], y[pairs[t, 1]]]]
    return out


@numba.njit(cache=True)
def _polar_value(x, y, square, pairs, add, mul):
    out = mul[add[x[square], x[square]], y[square]]
    for t in range(pairs.shape[0]):
        i = pairs[t, 0]
        j = pairs[t, 1]
        out = add[out, mul[x[i], y[j]]]
        out = add[out, mul[x[j], y[i]]]
    return out


@numba.njit(cache=True)
def _hexagon_kernel(coords, keys, terms, square, pairs, add, mul, neg, inv, q):
    npts, dim = coords.shape
    out = np.full((npts, q + 1), -1, dtype=np.int32)
    nlines = 0
    weights = np.empty(dim, dtype=np.int64)
    w = 1
    for k in range(dim - 1, -1, -1):
        weights[k] = w
        w *= q
    mat = np.zeros((6, dim), dtype=np.int64)
    pivcol = np.empty(dim, dtype=np.int64)
    basis = np.zeros((dim, dim), dtype=np.int64)
    chosen = np.zeros((dim, dim), dtype=np.int64)
    trial = np.zeros((dim, dim), dtype=np.int64)
    coef = np.zeros(dim, dtype=np.int64)
    y = np.empty(dim, dtype=np.int64)
    idx = np.empty(q + 1, dtype=np.int64)
    for p in range(npts):
        x = coords[p]
        mat[:, :] = 0
        for e in range(6):
            for t in range(4):
                c = x[terms[e, t, 0]]
                if terms[e, t, 2] < 0:
                    c = neg[c]
                yj = terms[e, t, 1]
                mat[e, yj] = add[mat[e, yj], c]
        rank = _rref(mat, add, mul, neg, inv, pivcol)
        nullity = dim - rank
        # null space basis, one vector per free column
        nb = 0
        for col in range(dim):
            free = True
            for r in range(rank):
                if pivcol[r] == col:
                    free = False
            if not free:
                continue
            basis[nb, :] = 0
            basis[nb, col] = 1
            for r in range(rank):
                basis[nb, pivcol[r]] = neg[mat[r, col]]
            nb += 1
        # complete x to a basis of the null space
        m = 0
        for b in range(nb):
            trial[0, :] = x
            for g in range(m):
                trial[g + 1, :] = chosen[g]
            trial[m + 1, :] = basis[b]
            if _rref(trial[: m + 2], add, mul, neg, inv, pivcol) == m + 2:
                chosen[m, :] = basis[b]
                m += 1
        if m != nullity - 1 or m < 2:
            return out[:nlines], p
        # walk the directions of the null space modulo x (points of PG(m-1, q))
        accepted = 0
        for lead in range(m):
            free = m - 1 - lead
            total = 1
            for _ in range(free):
                total *= q
            for code in range(total):
                coef[:] = 0
                coef[lead] = 1
                rest = code
                for k in range(m - 1, lead, -1):
                    coef[k] = rest % q
                    rest //= q
                y[:] = 0
                for g in range(m):
                    if coef[g] != 0:
                        for k in range(dim):
                            y[k] = add[y[k], mul[coef[g], chosen[g, k]]]
                if _form_value(y, square, pairs, add, mul) != 0:
                    continue
                if _polar_value(x, y, square, pairs, add, mul) != 0:
                    continue
                accepted += 1
                first = True
                for s in range(q):
                    key = 0
                    scale = 0
                    for k in range(dim):
                        val = add[y[k], mul[s, x[k]]]
                        if scale == 0 and val != 0:
                            scale = inv[val]
                        key += mul[scale, val] * weights[k]
                    pos = np.searchsorted(keys, key)
                    if pos >= npts or keys[pos] != key:
                        return out[:nlines], p
                    idx[s] = pos
                    if pos < p:
                        first = False
                idx[q] = p
                # emit each line once, from its smallest point
                if first:
                    if nlines >= npts:
                        return out[:nlines], p
                    out[nlines, :] = idx
                    nlines += 1
        if accepted != q + 1:
            return out[:nlines], p
    return out[:nlines], -1


def hexagon_lines(spec: FieldSpec) -> LineSet:
    """Lines of the split Cayley hexagon H(q) on the points of Q(6, q).

    Through a quadric point x the six equations are linear in the second
    point y of a line <x, y>; the hexagon lines on x are the totally singular
    lines inside that solution space, and there must be exactly q+1 of them.  Raises
    :class:`SelectionInvalid` unless the result is a (q+1)-regular incidence
    structure with (q^6 - 1)/(q - 1) lines whose points all lie on the quadric.
    """
    form = QuadraticForm.parabolic(6)
    pts = quadric_points(form, spec)
    q = spec.q
    tables = [np.ascontiguousarray(t, dtype=np.int64) for t in
              (spec.add_table, spec.mul_table, spec.neg_table, spec.inv_table)]
    pairs = np.array(form.pairs, dtype=np.int64)
    inc, bad = _hexagon_kernel(pts.coords.astype(np.int64), np.asarray(pts.keys),
                               _hexagon_system(), form.square, pairs, *tables, q)
    if bad >= 0:
        raise SelectionInvalid(f"point {pts[bad]} does not carry a plane of hexagon lines on the quadric")
    lines = _canonical_lines(pts, [inc])
    expected = (q**6 - 1) // (q - 1)
    if len(lines) != expected:
        raise SelectionInvalid(f"got {len(lines)} hexagon lines, expected {expected}")
    if not (lines.point_degrees == q + 1).all():
        raise SelectionInvalid("hexagon incidence is not (q+1)-regular on points")
    return lines
