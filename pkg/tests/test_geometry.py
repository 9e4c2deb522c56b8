import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddgraphs.field import make_field
from ddgraphs.geometry import (
    QuadraticForm,
    enumerate_projective_points,
    hexagon_lines,
    lines_on_quadric,
    normalize,
    plane_lines,
    plucker,
    plucker_satisfies_hexagon,
    quadric_points,
)


@pytest.mark.parametrize("n,q,count", [(2, 2, 7), (4, 4, 341), (6, 3, 1093), (2, 5, 31)])
def test_projective_point_counts(n, q, count):
    pts = enumerate_projective_points(n, make_field(q))
    assert len(pts) == count == (q ** (n + 1) - 1) // (q - 1)
    assert (np.diff(pts.keys) > 0).all()
    # each row is normalised: first nonzero coordinate is 1
    lead = pts.coords[np.arange(len(pts)), (pts.coords != 0).argmax(axis=1)]
    assert (lead == 1).all()


def test_points_match_brute_force():
    f = make_field(3)
    seen = set()
    for v in itertools.product(range(3), repeat=5):
        if any(v):
            seen.add(tuple(int(c) for c in normalize(f, np.array(v))[0]))
    pts = enumerate_projective_points(4, f)
    assert seen == {pts[i] for i in range(len(pts))}


@pytest.mark.parametrize("dim,q,count", [(4, 4, 85), (4, 2, 15), (4, 3, 40), (6, 3, 364), (6, 2, 63)])
def test_quadric_point_counts(dim, q, count):
    assert len(quadric_points(QuadraticForm.parabolic(dim), make_field(q))) == count


@pytest.mark.parametrize("q", [2, 3, 4])
def test_q4_lines(q):
    f = make_field(q)
    form = QuadraticForm.parabolic(4)
    lines = lines_on_quadric(form, f)
    assert len(lines) == (q + 1) * (q * q + 1)
    assert lines.incidence.shape[1] == q + 1
    assert (lines.point_degrees == q + 1).all()
    assert (form.evaluate(f, lines.points.coords[lines.incidence.ravel()]) == 0).all()


def test_dimension6_lines_q2_exhaustive():
    f = make_field(2)
    form = QuadraticForm.parabolic(6)
    lines = lines_on_quadric(form, f)
    pts = lines.points
    # every pair of singular, orthogonal points spans a line of the quadric
    brute = set()
    c = pts.coords.astype(np.int64)
    for i, j in itertools.combinations(range(len(pts)), 2):
        if form.polar(f, c[i], c[j][None])[0] == 0:
            third = pts.index_of(c[i] ^ c[j])[0]
            brute.add(tuple(sorted((i, j, int(third)))))
    assert {tuple(r) for r in lines.incidence.tolist()} == brute
    assert len(lines) == 315


@pytest.mark.parametrize("q,count", [(2, 63), (3, 364), (4, 1365)])
def test_hexagon_lines(q, count):
    f = make_field(q)
    lines = hexagon_lines(f)
    assert len(lines) == count
    assert (lines.point_degrees == q + 1).all()
    form = QuadraticForm.parabolic(6)
    assert (form.evaluate(f, lines.points.coords[lines.incidence.ravel()]) == 0).all()


def test_hexagon_lines_are_the_plucker_selection_q2():
    # oracle: filter all quadric lines by the six Pluecker conditions directly
    f = make_field(2)
    quad = lines_on_quadric(QuadraticForm.parabolic(6), f)
    c = quad.points.coords.astype(np.int64)
    chosen = {tuple(r) for r in quad.incidence.tolist()
              if plucker_satisfies_hexagon(f, c[r[0]], c[r[1]])}
    hexa = {tuple(r) for r in hexagon_lines(f).incidence.tolist()}
    assert chosen == hexa


@pytest.mark.parametrize("q", [3, 4])
def test_plucker_invariance(q):
    f = make_field(q)
    rng = np.random.default_rng(q)
    lines = hexagon_lines(f)
    c = lines.points.coords.astype(np.int64)
    for row in lines.incidence[rng.choice(len(lines), 20, replace=False)]:
        ref = plucker(f, c[row[0]], c[row[1]])
        for _ in range(5):
            a, b = rng.choice(row, 2, replace=False)
            s, t = rng.integers(1, q, size=2)
            x = f.mul_table[s, c[a]]
            y = f.add_table[f.mul_table[t, c[b]], c[a]]
            assert plucker(f, x, y) == ref
            assert plucker_satisfies_hexagon(f, x, y)


def test_plane_lines():
    f = make_field(3)
    pts, lines = plane_lines(f)
    assert len(pts) == len(lines) == 13
    assert (lines.point_degrees == 4).all()
    # two distinct lines meet in exactly one point
    sets = [set(r) for r in lines.incidence.tolist()]
    assert all(len(a & b) == 1 for a, b in itertools.combinations(sets, 2))


@given(st.sampled_from([2, 3, 4, 5, 7, 8, 9]), st.data())
def test_normalize_idempotent(q, data):
    f = make_field(q)
    v = np.array(data.draw(st.lists(st.integers(0, q - 1), min_size=7, max_size=7)))
    if not v.any():
        v[3] = 1
    once = normalize(f, v)
    assert (normalize(f, once) == once).all()
    k = data.draw(st.integers(1, q - 1))
    assert (normalize(f, f.mul_table[k, v]) == once).all()


def test_normalize_rejects_zero():
    with pytest.raises(ValueError):
        normalize(make_field(3), np.zeros(3, dtype=int))
