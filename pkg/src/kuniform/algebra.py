"""Exact arithmetic: GF(4), small finite fields, Pauli products, Gaussian rationals.

Pauli labels follow 0 = I, 1 = sigma_x, 2 = sigma_y, 3 = sigma_z.  GF(4)
elements {0, 1, x, x+1} are encoded as the integers 0..3 (bit i is the
coefficient of x**i), so GF(4) addition is XOR of the encodings and the
Pauli product of labels is, up to a phase, their GF(4) sum.

Phases are integer exponents of i taken mod 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "gf4_add",
    "gf4_mul",
    "pauli_product",
    "anticommutes",
    "PauliWord",
    "word_product",
    "words_commute",
    "GFTables",
    "gfq_tables",
    "is_prime_power",
    "symbol_addition",
    "GaussianRational",
]


def gf4_add(a: int, b: int) -> int:
    """GF(4) sum of two labels; characteristic 2 makes it XOR."""
    _check_label(a)
    _check_label(b)
    return a ^ b


def gf4_mul(a: int, b: int) -> int:
    return int(gfq_tables(4).mul[a, b])


def _check_label(a: int) -> None:
    if not 0 <= a <= 3:
        raise ValueError(f"GF(4) label out of range: {a}")


# sigma_a sigma_b = i**e sigma_(a^b); row a, column b holds e.
_PHASE = (
    (0, 0, 0, 0),
    (0, 0, 1, 3),
    (0, 3, 0, 1),
    (0, 1, 3, 0),
)


def pauli_product(a: int, b: int) -> tuple[int, int]:
    """Return ``(e, c)`` with sigma_a sigma_b = i**e sigma_c."""
    _check_label(a)
    _check_label(b)
    return _PHASE[a][b], a ^ b


def anticommutes(a: int, b: int) -> bool:
    _check_label(a)
    _check_label(b)
    return a != 0 and b != 0 and a != b


@dataclass(frozen=True)
class PauliWord:
    """An N-qubit Pauli operator ``i**phase * sigma_labels[0] (x) ...``."""

    labels: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        labels = tuple(int(a) for a in self.labels)
        for a in labels:
            _check_label(a)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls((0,) * n)

    @classmethod
    def from_string(cls, s: str) -> "PauliWord":
        return cls(tuple(int(ch) for ch in s if not ch.isspace()))

    def __len__(self) -> int:
        return len(self.labels)

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return word_product(self, other)

    def weight(self) -> int:
        return sum(1 for a in self.labels if a)

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.phase]
        return sign + "".join(map(str, self.labels))


def word_product(w1: PauliWord, w2: PauliWord) -> PauliWord:
    if len(w1) != len(w2):
        raise ValueError(f"length mismatch: {len(w1)} vs {len(w2)}")
    phase = w1.phase + w2.phase
    labels = []
    for a, b in zip(w1.labels, w2.labels):
        labels.append(a ^ b)
        phase += _PHASE[a][b]
    return PauliWord(tuple(labels), phase)


def words_commute(w1: PauliWord, w2: PauliWord) -> bool:
    if len(w1) != len(w2):
        raise ValueError(f"length mismatch: {len(w1)} vs {len(w2)}")
    flips = sum(1 for a, b in zip(w1.labels, w2.labels) if a and b and a != b)
    return flips % 2 == 0


# ---------------------------------------------------------------------------
# small finite fields

# Conway polynomials, coefficients low degree first (monic, leading 1 implied last).
CONWAY_POLYNOMIALS: dict[int, tuple[int, int, tuple[int, ...]]] = {
    2: (2, 1, (0, 1)),
    3: (3, 1, (0, 1)),
    4: (2, 2, (1, 1, 1)),  # x^2 + x + 1
    5: (5, 1, (0, 1)),
    7: (7, 1, (0, 1)),
    8: (2, 3, (1, 1, 0, 1)),  # x^3 + x + 1
    9: (3, 2, (2, 2, 1)),  # x^2 + 2x + 2
    11: (11, 1, (0, 1)),
    13: (13, 1, (0, 1)),
    16: (2, 4, (1, 1, 0, 0, 1)),  # x^4 + x + 1
}


def is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    p = next(f for f in range(2, q + 1) if q % f == 0)
    while q % p == 0:
        q //= p
    return q == 1


@dataclass(frozen=True)
class GFTables:
    """Addition/multiplication tables of GF(q).

    Element ``v`` encodes the polynomial sum(digit_j(v) * x**j) with digits in
    base p.  ``neg`` and ``inv`` are lookup vectors (``inv[0]`` is 0).
    """

    q: int
    p: int
    n: int
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray

    def sub(self, a, b):
        return self.add[a, self.neg[b]]


def _digits(v: int, p: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        out.append(v % p)
        v //= p
    return out


def _from_digits(ds: Sequence[int], p: int) -> int:
    v = 0
    for d in reversed(ds):
        v = v * p + d
    return v


@lru_cache(maxsize=None)
def gfq_tables(q: int) -> GFTables:
    if q not in CONWAY_POLYNOMIALS:
        raise ValueError(f"unsupported field order {q}; supported: {sorted(CONWAY_POLYNOMIALS)}")
    p, n, poly = CONWAY_POLYNOMIALS[q]
    add = np.zeros((q, q), dtype=np.int64)
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        da = _digits(a, p, n)
        for b in range(q):
            db = _digits(b, p, n)
            add[a, b] = _from_digits([(x + y) % p for x, y in zip(da, db)], p)
            prod = [0] * (2 * n - 1)
            for i, x in enumerate(da):
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
            # reduce modulo the monic polynomial of degree n
            for deg in range(2 * n - 2, n - 1, -1):
                c = prod[deg]
                if c:
                    for j in range(n + 1):
                        prod[deg - n + j] = (prod[deg - n + j] - c * poly[j]) % p
            mul[a, b] = _from_digits(prod[:n], p)
    neg = np.array([int(np.flatnonzero(add[a] == 0)[0]) for a in range(q)], dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        hits = np.flatnonzero(mul[a] == 1)
        if len(hits) != 1:
            raise ArithmeticError(f"GF({q}) table: {a} has no unique inverse")
        inv[a] = hits[0]
    for t in (add, mul, neg, inv):
        t.setflags(write=False)
    tables = GFTables(q, p, n, add, mul, neg, inv)
    _check_field_axioms(tables)
    return tables


def _check_field_axioms(t: GFTables) -> None:
    q, add, mul = t.q, t.add, t.mul
    idx = np.arange(q)
    if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
        raise ArithmeticError(f"GF({q}) tables not commutative")
    if not (np.array_equal(add[0], idx) and np.array_equal(mul[1], idx)):
        raise ArithmeticError(f"GF({q}) identities broken")
    # associativity and distributivity over all triples
    a, b, c = np.meshgrid(idx, idx, idx, indexing="ij")
    if not np.array_equal(add[add[a, b], c], add[a, add[b, c]]):
        raise ArithmeticError(f"GF({q}) addition not associative")
    if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
        raise ArithmeticError(f"GF({q}) multiplication not associative")
    if not np.array_equal(mul[a, add[b, c]], add[mul[a, b], mul[a, c]]):
        raise ArithmeticError(f"GF({q}) not distributive")
    for row in add:
        if sorted(row) != list(range(q)):
            raise ArithmeticError(f"GF({q}) addition is not a group")


@lru_cache(maxsize=None)
def symbol_addition(d: int, group: str = "field") -> np.ndarray:
    """Addition table of the abelian group placed on the symbols ``0..d-1``.

    ``group="field"`` uses the additive group of GF(d) (XOR for d = 4, 8, 16),
    falling back to Z_d when d is not a supported prime power.
    ``group="cyclic"`` always uses Z_d.  For prime d the two coincide.
    """
    if group not in ("field", "cyclic"):
        raise ValueError(f"unknown symbol group {group!r}")
    if group == "field" and d in CONWAY_POLYNOMIALS:
        return gfq_tables(d).add
    idx = np.arange(d)
    table = (idx[:, None] + idx[None, :]) % d
    table.setflags(write=False)
    return table


def symbol_negation(d: int, group: str = "field") -> np.ndarray:
    add = symbol_addition(d, group)
    return np.argmin(add, axis=1)


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussianRational:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    @classmethod
    def i_power(cls, e: int) -> "GaussianRational":
        return cls(*((1, 0), (0, 1), (-1, 0), (0, -1))[e % 4])

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * o.conjugate() * GaussianRational(1 / n)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def gaussian_sum(values: Iterable[GaussianRational]) -> GaussianRational:
    total = GaussianRational()
    for v in values:
        total = total + v
    return total


def gf_row_reduce(rows, q: int) -> np.ndarray:
    """Reduced row echelon form over GF(q); zero rows are dropped."""
    t = gfq_tables(q)
    m = np.atleast_2d(np.array(rows, dtype=np.int64))
    pivot_row = 0
    for col in range(m.shape[1]):
        hits = np.flatnonzero(m[pivot_row:, col]) + pivot_row
        if len(hits) == 0:
            continue
        r = hits[0]
        m[[pivot_row, r]] = m[[r, pivot_row]]
        m[pivot_row] = t.mul[t.inv[m[pivot_row, col]], m[pivot_row]]
        for other in range(m.shape[0]):
            c = m[other, col]
            if other != pivot_row and c:
                m[other] = t.add[m[other], t.neg[t.mul[c, m[pivot_row]]]]
        pivot_row += 1
        if pivot_row == m.shape[0]:
            break
    return m[:pivot_row]


def gf_rank(rows, q: int) -> int:
    return len(gf_row_reduce(rows, q))
