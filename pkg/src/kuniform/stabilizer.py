"""Qubit mixed states from GF(4) generator matrices.

Row i of an m x N matrix over {0,1,2,3} is the Pauli word G_i.  The state is
rho = 2**-N (I + G_1)...(I + G_m), valid when the rows commute, are
independent, and every nonempty product has weight >= k + 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .algebra import GaussianRational, PauliWord, word_product, words_commute

MAX_DENSE_QUBITS = 12


class GeneratorError(ValueError):
    """A generator matrix fails one of the commuting/independence/uniformity checks."""


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    entries: np.ndarray
    n_qubits: int | None = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.size == 0:
            if self.n_qubits is None:
                raise ValueError("an empty generator matrix needs n_qubits")
            a = a.reshape(0, self.n_qubits)
        if a.ndim != 2:
            raise ValueError("generator matrix must be 2-d")
        if a.size and (a.min() < 0 or a.max() > 3):
            raise ValueError("generator entries must be in {0,1,2,3}")
        if a.shape[0] > a.shape[1]:
            raise ValueError(f"m={a.shape[0]} rows exceed N={a.shape[1]} qubits")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "n_qubits", a.shape[1])

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def words(self) -> list[PauliWord]:
        return [PauliWord(tuple(row)) for row in self.entries]

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries) and self.N == other.N

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))


def subset_products(G: GeneratorMatrix) -> Iterator[tuple[int, PauliWord]]:
    """Yield ``(mask, G_1^j1 ... G_m^jm)`` for all 2**m masks in Gray-code order.

    Each step multiplies by a single generator.  The generators are assumed to
    commute when phases matter; the labels are correct regardless.
    """
    words = G.words()
    current = PauliWord.identity(G.N)
    mask = 0
    yield mask, current
    for step in range(1, 2**G.m):
        bit = (step & -step).bit_length() - 1
        mask ^= 1 << bit
        current = word_product(current, words[bit])
        yield mask, current


def check_commuting(G: GeneratorMatrix) -> bool:
    words = G.words()
    return all(words_commute(a, b) for a, b in itertools.combinations(words, 2))


def check_independence(G: GeneratorMatrix) -> bool:
    return all(mask == 0 or word.weight() > 0 for mask, word in subset_products(G))


def min_subset_weight(G: GeneratorMatrix) -> int:
    """Smallest GF(4) weight over the nonempty subset sums of the rows."""
    weights = [word.weight() for mask, word in subset_products(G) if mask]
    return min(weights) if weights else G.N + 1


def check_uniformity(G: GeneratorMatrix, k: int) -> bool:
    if not 1 <= k < G.N:
        raise ValueError(f"k={k} outside 1..N-1")
    return min_subset_weight(G) >= k + 1


def max_k(G: GeneratorMatrix) -> int:
    if not check_independence(G):
        raise GeneratorError("rows are not independent")
    return min(min_subset_weight(G), G.N) - 1


@dataclass(frozen=True)
class StabilizerChecks:
    commuting: bool
    independent: bool
    max_k: int | None

    @property
    def valid(self) -> bool:
        return self.commuting and self.independent and (self.max_k or 0) >= 1


def check_all(G: GeneratorMatrix) -> StabilizerChecks:
    commuting = check_commuting(G)
    independent = check_independence(G)
    return StabilizerChecks(commuting, independent, max_k(G) if independent else None)


# ---------------------------------------------------------------------------
# dense operators


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Matrix with Gaussian-rational entries (re + i*im) / den, integer numerators."""

    re: np.ndarray
    im: np.ndarray
    den: int

    def __post_init__(self):
        if self.re.shape != self.im.shape or self.re.ndim != 2:
            raise ValueError("real and imaginary parts must be matching 2-d arrays")

    @property
    def dim(self) -> int:
        return self.re.shape[0]

    def entry(self, i: int, j: int) -> GaussianRational:
        return GaussianRational(Fraction(int(self.re[i, j]), self.den), Fraction(int(self.im[i, j]), self.den))

    def trace(self) -> GaussianRational:
        return GaussianRational(
            Fraction(int(np.trace(self.re)), self.den), Fraction(int(np.trace(self.im)), self.den)
        )

    def is_hermitian(self) -> bool:
        return np.array_equal(self.re, self.re.T) and np.array_equal(self.im, -self.im.T)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        re = self.re @ other.re - self.im @ other.im
        im = self.re @ other.im + self.im @ other.re
        return DenseOperator(re, im, self.den * other.den)

    def scaled(self, c: Fraction) -> "DenseOperator":
        c = Fraction(c)
        return DenseOperator(self.re * c.numerator, self.im * c.numerator, self.den * c.denominator)

    def __eq__(self, other):
        if not isinstance(other, DenseOperator):
            return NotImplemented
        return (
            self.re.shape == other.re.shape
            and np.array_equal(self.re * other.den, other.re * self.den)
            and np.array_equal(self.im * other.den, other.im * self.den)
        )

    __hash__ = None

    @classmethod
    def identity(cls, dim: int, den: int = 1) -> "DenseOperator":
        eye = np.eye(dim, dtype=np.int64)
        return cls(eye, np.zeros_like(eye), den)


_RE_OF_PHASE = np.array([1, 0, -1, 0], dtype=np.int64)
_IM_OF_PHASE = np.array([0, 1, 0, -1], dtype=np.int64)


def pauli_action(word: PauliWord) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rows, phase)`` such that word |j> = i**phase[j] |rows[j]>.

    Basis index j is big-endian: qubit 0 is the most significant bit.
    """
    n = len(word)
    xmask = zmask = 0
    ny = 0
    for pos, a in enumerate(word.labels):
        bit = 1 << (n - 1 - pos)
        if a in (1, 2):
            xmask |= bit
        if a in (2, 3):
            zmask |= bit
        ny += a == 2
    j = np.arange(2**n, dtype=np.int64)
    # sigma_y = i sigma_x sigma_z; sigma_z contributes (-1)**bit before the flip
    phase = (word.phase + ny + 2 * np.bitwise_count(j & zmask).astype(np.int64)) % 4
    return j ^ xmask, phase


def pauli_matrix(word: PauliWord) -> DenseOperator:
    rows, phase = pauli_action(word)
    dim = len(rows)
    re = np.zeros((dim, dim), dtype=np.int64)
    im = np.zeros((dim, dim), dtype=np.int64)
    cols = np.arange(dim)
    re[rows, cols] = _RE_OF_PHASE[phase]
    im[rows, cols] = _IM_OF_PHASE[phase]
    return DenseOperator(re, im, 1)


def _require_valid(G: GeneratorMatrix) -> None:
    if G.N > MAX_DENSE_QUBITS:
        raise ValueError(f"dense synthesis limited to N <= {MAX_DENSE_QUBITS}, got {G.N}")
    if G.m == 0:
        return
    checks = check_all(G)
    if not checks.valid:
        raise GeneratorError(f"generator matrix fails the stabilizer checks: {checks}")


def synthesize_density(G: GeneratorMatrix) -> DenseOperator:
    """rho = 2**-N * sum over subsets of the subset products; m = 0 gives I / 2**N."""
    _require_valid(G)
    dim = 2**G.N
    re = np.zeros((dim, dim), dtype=np.int64)
    im = np.zeros((dim, dim), dtype=np.int64)
    cols = np.arange(dim)
    for _, word in subset_products(G):
        rows, phase = pauli_action(word)
        re[rows, cols] += _RE_OF_PHASE[phase]
        im[rows, cols] += _IM_OF_PHASE[phase]
    return DenseOperator(re, im, dim)


def purity(rho: DenseOperator) -> Fraction:
    """Tr(rho^2) as an exact rational."""
    if rho.re.shape[0] != rho.re.shape[1]:
        raise ValueError("purity needs a square operator")
    real = int((rho.re * rho.re.T).sum()) - int((rho.im * rho.im.T).sum())
    imag = int((rho.re * rho.im.T).sum()) + int((rho.im * rho.re.T).sum())
    if imag:
        raise ValueError("Tr(rho^2) is not real; operator is not Hermitian")
    return Fraction(real, rho.den**2)


def pure_decomposition(G: GeneratorMatrix):
    """The 2**(N-m) orthonormal states whose uniform mixture is rho.

    Columns of (I + G_1)...(I + G_m) are scanned in basis order; each nonzero
    column is put in canonical phase (first amplitude real positive, numerators
    coprime) and kept if new.
    """
    from .quantum_verify import SparseState

    rho = synthesize_density(G)
    target = 2 ** (G.N - G.m)
    seen = set()
    states = []
    for j in range(rho.dim):
        re, im = rho.re[:, j], rho.im[:, j]
        support = np.flatnonzero((re != 0) | (im != 0))
        if len(support) == 0:
            continue
        f = support[0]
        fr, fi = int(re[f]), int(im[f])
        # multiply by conj(v_f) so the first amplitude becomes real positive
        nr = re[support] * fr + im[support] * fi
        ni = im[support] * fr - re[support] * fi
        g = math.gcd(*(int(x) for x in np.concatenate([nr, ni])))
        key = (tuple(support.tolist()), tuple((nr // g).tolist()), tuple((ni // g).tolist()))
        if key in seen:
            continue
        seen.add(key)
        terms = {}
        for idx, a, b in zip(support, nr // g, ni // g):
            bits = tuple((int(idx) >> (G.N - 1 - q)) & 1 for q in range(G.N))
            terms[bits] = (int(a), int(b))
        states.append(SparseState(2, G.N, terms))
        if len(states) == target:
            break
    if len(states) != target:
        raise GeneratorError(f"found {len(states)} states, expected {target}")
    return states
