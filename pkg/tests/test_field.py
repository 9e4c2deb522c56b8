import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddgraphs.field import (
    MODULI,
    DivisionByZero,
    NotPrimePower,
    field_arith,
    field_elements,
    field_inv,
    make_field,
)

SMALL_Q = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]


def poly_mul(p, n, modulus, a, b):
    """Schoolbook multiply of base-p digit vectors, then reduce by the monic modulus."""
    da = [(a // p**i) % p for i in range(n)]
    db = [(b // p**i) % p for i in range(n)]
    prod = [0] * (2 * n - 1)
    for i, x in enumerate(da):
        for j, y in enumerate(db):
            prod[i + j] = (prod[i + j] + x * y) % p
    for deg in range(2 * n - 2, n - 1, -1):
        c = prod[deg]
        if c:
            for k in range(n + 1):
                prod[deg - n + k] = (prod[deg - n + k] - c * modulus[k]) % p
    return sum(prod[i] * p**i for i in range(n))


def poly_add(p, n, a, b):
    return sum((((a // p**i) + (b // p**i)) % p) * p**i for i in range(n))


def test_prime_field_parameters():
    f = make_field(5)
    assert (f.p, f.n, f.q) == (5, 1, 5)


def test_gf9_modulus_has_no_root():
    f = make_field(9)
    assert (f.p, f.n) == (3, 2)
    c0, c1, c2 = f.modulus
    assert c2 == 1
    assert all((c0 + c1 * x + x * x) % 3 for x in range(3))


@pytest.mark.parametrize("q", [1, 6, 12, 100, 0])
def test_not_prime_power(q):
    with pytest.raises(NotPrimePower):
        make_field(q)


def test_order_limit():
    with pytest.raises(ValueError):
        make_field(16384 * 2)


def test_examples():
    assert field_arith(make_field(5), "mul", 2, 3) == 1
    f4 = make_field(4)
    assert f4.modulus == (1, 1, 1)  # x^2 + x + 1
    assert field_arith(f4, "mul", 2, 2) == 3  # x * x = x + 1
    assert field_inv(make_field(5), 2) == 3
    for q in SMALL_Q:
        f = make_field(q)
        assert field_inv(f, 1) == 1
        assert all(field_arith(f, "add", a, 0) == a for a in range(q))


def test_inverse_of_zero():
    with pytest.raises(DivisionByZero):
        field_inv(make_field(7), 0)


def test_gf9_inverses_against_table():
    f = make_field(9)
    for a in range(1, 9):
        assert f.mul_table[a, field_inv(f, a)] == 1


def test_elements():
    assert field_elements(make_field(2)) == [0, 1]
    assert len(field_elements(make_field(9))) == 9
    e13 = field_elements(make_field(13))
    assert len(set(e13)) == 13 and e13 == sorted(e13)


@pytest.mark.parametrize("q", SMALL_Q)
def test_multiplication_matches_polynomial_oracle(q):
    f = make_field(q)
    mod = f.modulus if f.n > 1 else (0, 1)
    for a in range(q):
        for b in range(q):
            want = (a * b) % q if f.n == 1 else poly_mul(f.p, f.n, mod, a, b)
            assert f.mul(a, b) == want
            assert f.add(a, b) == ((a + b) % q if f.n == 1 else poly_add(f.p, f.n, a, b))


@pytest.mark.parametrize("q", SMALL_Q)
def test_field_axioms_exhaustive(q):
    f = make_field(q)
    add, mul = f.add_table.astype(np.int64), f.mul_table.astype(np.int64)
    r = np.arange(q)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    assert (add[add[a, b], c] == add[a, add[b, c]]).all()
    assert (mul[mul[a, b], c] == mul[a, mul[b, c]]).all()
    assert (mul[a, add[b, c]] == add[mul[a, b], mul[a, c]]).all()
    assert (add == add.T).all() and (mul == mul.T).all()
    assert (add[r, 0] == r).all() and (mul[r, 1] == r).all()
    assert (add[r, f.neg_table[r]] == 0).all()
    nz = r[1:]
    assert (mul[nz, f.inv_table[nz]] == 1).all()
    for x in range(q):
        for y in range(q):
            assert f.sub(f.add(x, y), y) == x
    # the scalar methods agree with the dense tables
    for x, y in itertools.product(range(q), repeat=2):
        assert f.add(x, y) == add[x, y] and f.mul(x, y) == mul[x, y]


@pytest.mark.parametrize("q", SMALL_Q)
def test_frobenius_and_fermat(q):
    f = make_field(q)
    for a in range(q):
        for b in range(q):
            assert f.pow(f.add(a, b), f.p) == f.add(f.pow(a, f.p), f.pow(b, f.p))
    assert all(f.pow(a, q - 1) == 1 for a in range(1, q))


@pytest.mark.parametrize("pn", sorted(MODULI))
def test_moduli_are_primitive(pn):
    # the table modulus must generate the full multiplicative group through x
    p, n = pn
    f = make_field(p**n)
    seen = set()
    x = 1
    for _ in range(f.q - 1):
        seen.add(x)
        x = poly_mul(p, n, f.modulus, x, p)  # multiply by x, whose index is p
    assert len(seen) == f.q - 1


@given(st.sampled_from([11, 13, 25, 27, 32, 49, 64, 81, 121, 125, 128, 169, 243, 256]), st.data())
def test_sampled_axioms_larger_fields(q, data):
    f = make_field(q)
    a, b, c = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    if a:
        assert f.mul(a, f.inv(a)) == 1
        assert f.pow(a, q - 1) == 1
        assert f.div(f.mul(a, b), a) == b


def test_tables_text():
    text = make_field(2).tables_text()
    assert text.splitlines()[1:] == ["add", "0 1", "1 0", "mul", "0 0", "0 1"]
