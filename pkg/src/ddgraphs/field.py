"""Arithmetic in GF(p^n) for the small prime powers used by the geometries.

Elements are dense integer indices in ``[0, q)``: the index encodes the
coefficient vector ``(c_0, ..., c_{n-1})`` of the element as a polynomial in
``x`` over GF(p), written in base ``p`` with ``c_0`` the least significant
digit.  Index 0 is zero and index 1 is one.

Multiplication and inversion go through log/antilog tables built once per
field.  Addition is digit-wise modulo ``p`` (plain XOR when ``p == 2``).
Dense ``q x q`` tables are available for the vectorised geometry code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DivisionByZero",
    "FieldElement",
    "FieldSpec",
    "NotPrimePower",
    "field_arith",
    "field_elements",
    "field_inv",
    "make_field",
]

MAX_ORDER = 16384

FieldElement = int

# Lexicographically least monic primitive polynomial for every extension
# degree n >= 2 with p**n <= MAX_ORDER.  Coefficients are (c_0, ..., c_{n-1});
# the leading 1 is implied.  Kept literal so field construction never depends
# on a runtime search.
MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1),
    (2, 3): (1, 1, 0),
    (2, 4): (1, 1, 0, 0),
    (2, 5): (1, 0, 1, 0, 0),
    (2, 6): (1, 1, 0, 0, 0, 0),
    (2, 7): (1, 1, 0, 0, 0, 0, 0),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0),
    (2, 9): (1, 0, 0, 0, 1, 0, 0, 0, 0),
    (2, 10): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (2, 11): (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (2, 12): (1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0),
    (2, 13): (1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (2, 14): (1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (3, 2): (2, 1),
    (3, 3): (1, 2, 0),
    (3, 4): (2, 1, 0, 0),
    (3, 5): (1, 2, 0, 0, 0),
    (3, 6): (2, 1, 0, 0, 0, 0),
    (3, 7): (1, 2, 1, 0, 0, 0, 0),
    (3, 8): (2, 0, 0, 1, 0, 0, 0, 0),
    (5, 2): (2, 1),
    (5, 3): (2, 3, 0),
    (5, 4): (2, 2, 1, 0),
    (5, 5): (2, 4, 0, 0, 0),
    (5, 6): (2, 1, 0, 0, 0, 0),
    (7, 2): (3, 1),
    (7, 3): (2, 3, 0),
    (7, 4): (5, 3, 1, 0),
    (11, 2): (7, 1),
    (11, 3): (4, 1, 0),
    (11, 4): (2, 1, 0, 0),
    (13, 2): (2, 1),
    (13, 3): (6, 1, 0),
    (17, 2): (3, 1),
    (17, 3): (3, 1, 0),
    (19, 2): (2, 1),
    (19, 3): (4, 1, 0),
    (23, 2): (7, 1),
    (23, 3): (3, 1, 0),
    (29, 2): (3, 1),
    (31, 2): (12, 1),
    (37, 2): (5, 1),
    (41, 2): (12, 1),
    (43, 2): (3, 1),
    (47, 2): (13, 1),
    (53, 2): (5, 1),
    (59, 2): (2, 1),
    (61, 2): (2, 1),
    (67, 2): (12, 1),
    (71, 2): (11, 1),
    (73, 2): (11, 1),
    (79, 2): (3, 1),
    (83, 2): (2, 1),
    (89, 2): (6, 1),
    (97, 2): (5, 1),
    (101, 2): (3, 1),
    (103, 2): (5, 1),
    (107, 2): (5, 1),
    (109, 2): (6, 1),
    (113, 2): (10, 1),
    (127, 2): (3, 1),
}

# dense q x q tables are only materialised up to this order
_DENSE_TABLE_LIMIT = 4096


class NotPrimePower(ValueError):
    """Raised when a requested field order is not a prime power."""


class DivisionByZero(ZeroDivisionError):
    """Raised when inverting the zero element."""


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = next((d for d in range(2, int(q**0.5) + 1) if q % d == 0), q)
    n, rest = 0, q
    while rest % p == 0:
        rest //= p
        n += 1
    if rest != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    return p, n


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """GF(p^n) with precomputed tables.

    ``modulus`` lists the coefficients of the monic defining polynomial from
    the constant term up, leading 1 included.  For prime fields it is the
    placeholder ``(0, 1)`` and plays no role.
    """

    p: int
    n: int
    q: int
    modulus: tuple[int, ...]
    digits: np.ndarray = field(repr=False)
    exp_table: np.ndarray = field(repr=False)
    log_table: np.ndarray = field(repr=False)
    generator: int = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return (self.p, self.n, self.modulus) == (other.p, other.n, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.n, self.modulus))

    # scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self._compose((self.digits[a] + self.digits[b]) % self.p)

    def neg(self, a: int) -> int:
        if self.n == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self._compose((-self.digits[a]) % self.p)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("zero has no multiplicative inverse")
        return int(self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp_table[(self.log_table[a] * e) % (self.q - 1)])

    def _compose(self, digits: np.ndarray) -> int:
        return int(np.dot(digits, self.p ** np.arange(self.n)))

    # dense tables for vectorised callers ---------------------------------

    @property
    def add_table(self) -> np.ndarray:
        return _dense_tables(self)[0]

    @property
    def mul_table(self) -> np.ndarray:
        return _dense_tables(self)[1]

    @property
    def neg_table(self) -> np.ndarray:
        return _dense_tables(self)[2]

    @property
    def inv_table(self) -> np.ndarray:
        """Inverse lookup; entry 0 is 0 and must never be used as an inverse."""
        return _dense_tables(self)[3]

    def tables_text(self) -> str:
        """Addition and multiplication tables as row-major plain text."""
        width = len(str(self.q - 1))
        lines = [f"GF({self.q}) p={self.p} n={self.n} modulus={list(self.modulus)}", "add"]
        for row in self.add_table:
            lines.append(" ".join(f"{v:>{width}}" for v in row))
        lines.append("mul")
        for row in self.mul_table:
            lines.append(" ".join(f"{v:>{width}}" for v in row))
        return "\n".join(lines)


@lru_cache(maxsize=None)
def _dense_tables(spec: FieldSpec) -> tuple[np.ndarray, ...]:
    q = spec.q
    if q > _DENSE_TABLE_LIMIT:
        raise ValueError(f"dense tables not available for q={q} > {_DENSE_TABLE_LIMIT}")
    dtype = np.int16 if q < 2**15 else np.int32
    idx = np.arange(q)
    if spec.n == 1:
        add = (idx[:, None] + idx[None, :]) % q
        neg = (-idx) % q
    elif spec.p == 2:
        add = idx[:, None] ^ idx[None, :]
        neg = idx.copy()
    else:
        powers = spec.p ** np.arange(spec.n)
        d = spec.digits
        add = ((d[:, None, :] + d[None, :, :]) % spec.p) @ powers
        neg = ((-d) % spec.p) @ powers
    log = spec.log_table
    mul = np.zeros((q, q), dtype=np.int64)
    mul[1:, 1:] = spec.exp_table[log[1:, None] + log[None, 1:]]
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = spec.exp_table[(q - 1 - log[1:]) % (q - 1)]
    tables = tuple(np.ascontiguousarray(t, dtype=dtype) for t in (add, mul, neg, inv))
    for t in tables:
        t.setflags(write=False)
    return tables


def _poly_mulmod(a: np.ndarray, b: np.ndarray, modulus: tuple[int, ...], p: int) -> np.ndarray:
    n = len(modulus) - 1
    prod = np.convolve(a, b) % p
    for deg in range(len(prod) - 1, n - 1, -1):
        c = prod[deg]
        if c:
            prod[deg - n : deg + 1] = (prod[deg - n : deg + 1] - c * np.asarray(modulus)) % p
    return prod[:n]


def _find_generator(p: int, n: int, modulus: tuple[int, ...]) -> tuple[int, np.ndarray]:
    """Smallest element of multiplicative order q - 1 and its power table."""
    q = p**n
    powers = p ** np.arange(n)
    digits = (np.arange(q)[:, None] // powers[None, :]) % p
    for g in range(2 if q > 2 else 1, q):
        exp = np.empty(q - 1, dtype=np.int64)
        cur = np.zeros(n, dtype=np.int64)
        cur[0] = 1
        gd = digits[g]
        order = 0
        for e in range(q - 1):
            value = int(cur @ powers)
            if e > 0 and value == 1:
                break
            exp[e] = value
            order += 1
            if n == 1:
                cur = np.array([(value * g) % p])
            else:
                cur = _poly_mulmod(cur, gd, modulus, p)
        if order == q - 1:
            return g, exp
    raise ValueError(f"no generator for GF({q}); modulus {modulus} is not irreducible")


@lru_cache(maxsize=None)
def make_field(q: int) -> FieldSpec:
    """Build GF(q) for a prime power ``2 <= q <= 16384``."""
    if not isinstance(q, (int, np.integer)) or q > MAX_ORDER:
        raise ValueError(f"field order must be an integer <= {MAX_ORDER}, got {q!r}")
    p, n = _factor_prime_power(int(q))
    modulus = (0, 1) if n == 1 else MODULI[(p, n)] + (1,)
    generator, exp = _find_generator(p, n, modulus)
    log = np.zeros(q, dtype=np.int64)
    log[exp] = np.arange(q - 1)
    # doubled so that log[a] + log[b] never needs a reduction
    exp2 = np.concatenate([exp, exp])
    powers = p ** np.arange(n)
    digits = (np.arange(q)[:, None] // powers[None, :]) % p
    for arr in (exp2, log, digits):
        arr.setflags(write=False)
    return FieldSpec(p, n, int(q), modulus, digits, exp2, log, generator)


def field_arith(spec: FieldSpec, kind: str, a: FieldElement, b: FieldElement) -> FieldElement:
    """Dispatch ``add``, ``sub`` or ``mul`` on two elements of ``spec``."""
    if kind == "add":
        return spec.add(a, b)
    if kind == "sub":
        return spec.sub(a, b)
    if kind == "mul":
        return spec.mul(a, b)
    raise ValueError(f"unknown operation {kind!r}")


def field_inv(spec: FieldSpec, a: FieldElement) -> FieldElement:
    return spec.inv(a)


def field_elements(spec: FieldSpec) -> list[FieldElement]:
    return list(range(spec.q))
