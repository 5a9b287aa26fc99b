"""Exact quantum checks: sparse states, partial traces, uniformity, purity.

Amplitudes are Gaussian integers n = (re, im) under a shared 1/sqrt(S)
normalisation, S = sum |n|^2.  Every reduced-density entry and purity is
therefore an exact rational; nothing here uses floating point.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Mapping, Sequence

import numpy as np

from .algebra import GaussianRational
from .stabilizer import DenseOperator

DEFAULT_MAX_REDUCED_DIM = 2**13
MAX_DENSE_QUBITS = 12


class NonOrthogonalWarning(UserWarning):
    pass


def _content(values) -> int:
    return reduce(math.gcd, values, 0)


@dataclass(frozen=True, eq=False)
class SparseState:
    """Pure state sum_b n_b |b> / sqrt(sum |n_b|^2) over N qudits of dimension d.

    Numerators are stored with coprime content so equal states compare equal;
    the global phase is kept as given.
    """

    d: int
    N: int
    terms: Mapping[tuple[int, ...], tuple[int, int]]

    def __post_init__(self):
        clean = {}
        for basis, amp in self.terms.items():
            basis = tuple(int(x) for x in basis)
            if len(basis) != self.N or any(not 0 <= x < self.d for x in basis):
                raise ValueError(f"bad basis string {basis} for N={self.N}, d={self.d}")
            re, im = (int(amp[0]), int(amp[1])) if isinstance(amp, tuple) else (int(amp), 0)
            if re or im:
                clean[basis] = (re, im)
        if not clean:
            raise ValueError("a state needs at least one nonzero amplitude")
        g = _content(v for amp in clean.values() for v in amp)
        if g > 1:
            clean = {b: (re // g, im // g) for b, (re, im) in clean.items()}
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @property
    def norm2(self) -> int:
        return sum(re * re + im * im for re, im in self.terms.values())

    def amplitude(self, basis) -> tuple[GaussianRational, int]:
        """``(n, S)`` with the amplitude of ``basis`` equal to n / sqrt(S)."""
        re, im = self.terms.get(tuple(basis), (0, 0))
        return GaussianRational(re, im), self.norm2

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SparseState):
            return NotImplemented
        return (self.d, self.N, self.terms) == (other.d, other.N, other.terms)

    def __hash__(self):
        return hash((self.d, self.N, tuple(self.terms.items())))

    def inner(self, other: "SparseState") -> GaussianRational:
        """<self|other> exactly; the square root cancels only when squared, so
        this returns the value times sqrt(S_self * S_other)."""
        re = im = 0
        for b, (ar, ai) in self.terms.items():
            if b in other.terms:
                br, bi = other.terms[b]
                re += ar * br + ai * bi
                im += ar * bi - ai * br
        return GaussianRational(re, im)

    def overlap2(self, other: "SparseState") -> Fraction:
        """|<self|other>|^2."""
        return self.inner(other).abs2() / (self.norm2 * other.norm2)

    def shifted(self, party: int, shift: int) -> "SparseState":
        """Apply the cyclic shift |x> -> |x + shift mod d> on one party."""
        terms = {}
        for b, amp in self.terms.items():
            nb = list(b)
            nb[party] = (nb[party] + shift) % self.d
            terms[tuple(nb)] = amp
        return SparseState(self.d, self.N, terms)


def block_to_state(rows, d: int) -> SparseState:
    """Equal superposition of the rows read as basis strings."""
    rows = np.asarray(rows, dtype=np.int64)
    basis = [tuple(r) for r in rows.tolist()]
    if len(set(basis)) != len(basis):
        raise ValueError("block has repeated rows")
    return SparseState(d, rows.shape[1], {b: (1, 0) for b in basis})


@dataclass(frozen=True, eq=False)
class MixedState:
    """Uniform mixture (1/m) sum_i |phi_i><phi_i|."""

    components: tuple[SparseState, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        if len({(c.d, c.N) for c in comps}) != 1:
            raise ValueError("components disagree on (d, N)")
        object.__setattr__(self, "components", comps)

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def d(self) -> int:
        return self.components[0].d

    @property
    def N(self) -> int:
        return self.components[0].N

    def __eq__(self, other):
        if not isinstance(other, MixedState):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    @cached_property
    def _arrays(self):
        """Flattened terms: basis (T, N), numerators, component index, common scale.

        Term t of component i carries weight scale[i] / den where
        den = m * lcm(S_i) and scale[i] = lcm(S_i) / S_i.
        """
        norms = [c.norm2 for c in self.components]
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), norms, 1)
        basis, re, im, comp = [], [], [], []
        for i, c in enumerate(self.components):
            for b, (a_re, a_im) in c.terms.items():
                basis.append(b)
                re.append(a_re)
                im.append(a_im)
                comp.append(i)
        scale = np.array([lcm // s for s in norms], dtype=object)
        small = all(x < 2**40 for x in scale) and lcm * self.m < 2**40
        dtype = np.int64 if small else object
        return (
            np.array(basis, dtype=np.int64).reshape(-1, self.N),
            np.array(re, dtype=dtype),
            np.array(im, dtype=dtype),
            np.array(comp, dtype=np.int64),
            scale.astype(dtype),
            self.m * lcm,
        )


def as_mixture(state) -> MixedState:
    if isinstance(state, MixedState):
        return state
    if isinstance(state, SparseState):
        return MixedState((state,))
    return MixedState(tuple(state))


def mixture_from_blocks(rows: np.ndarray, blocks: Sequence[Sequence[int]], d: int) -> MixedState:
    rows = np.asarray(rows)
    return MixedState(tuple(block_to_state(rows[list(b)], d) for b in blocks))


# ---------------------------------------------------------------------------
# reduced density matrices


@dataclass
class ReducedDensity:
    """Reduced state on parties ``subset``: entries (re + i im) / den.

    The diagonal is a dense vector of length d**t indexed by the base-d key of
    the subsystem string; off-diagonal entries live in a dict keyed (u, v).
    """

    subset: tuple[int, ...]
    d: int
    den: int
    diag: np.ndarray
    offdiag: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.d ** len(self.subset)

    def entry(self, u: int, v: int) -> GaussianRational:
        if u == v:
            return GaussianRational(Fraction(int(self.diag[u]), self.den))
        re, im = self.offdiag.get((u, v), (0, 0))
        return GaussianRational(Fraction(int(re), self.den), Fraction(int(im), self.den))

    def trace(self) -> Fraction:
        return Fraction(int(self.diag.sum()), self.den)

    def is_hermitian(self) -> bool:
        for (u, v), (re, im) in self.offdiag.items():
            if self.offdiag.get((v, u), (0, 0)) != (re, -im):
                return False
        return True

    def first_deviation(self) -> tuple[int, int] | None:
        """First (u, v) where the entry differs from I / d**t, or None."""
        for key in sorted(self.offdiag):
            if self.offdiag[key] != (0, 0):
                return key
        target = Fraction(self.den, self.dim)
        if target.denominator != 1:
            return (0, 0)
        bad = np.flatnonzero(self.diag != target.numerator)
        return (int(bad[0]), int(bad[0])) if len(bad) else None

    def is_maximally_mixed(self) -> bool:
        return self.first_deviation() is None

    def to_dense(self) -> DenseOperator:
        dim = self.dim
        re = np.zeros((dim, dim), dtype=np.int64)
        im = np.zeros((dim, dim), dtype=np.int64)
        re[np.arange(dim), np.arange(dim)] = self.diag
        for (u, v), (a, b) in self.offdiag.items():
            re[u, v], im[u, v] = a, b
        return DenseOperator(re, im, self.den)

    def __eq__(self, other):
        if not isinstance(other, ReducedDensity):
            return NotImplemented
        if (self.subset, self.d) != (other.subset, other.d):
            return False
        if not np.array_equal(self.diag * other.den, other.diag * self.den):
            return False
        keys = set(self.offdiag) | set(other.offdiag)
        for key in keys:
            a = self.offdiag.get(key, (0, 0))
            b = other.offdiag.get(key, (0, 0))
            if a[0] * other.den != b[0] * self.den or a[1] * other.den != b[1] * self.den:
                return False
        return True


def _keys(basis: np.ndarray, cols: Sequence[int], d: int) -> np.ndarray:
    key = np.zeros(basis.shape[0], dtype=np.int64)
    for c in cols:
        key = key * d + basis[:, c]
    return key


def _reduce_sparse(M: MixedState, subset: tuple[int, ...]) -> ReducedDensity:
    basis, re, im, comp, scale, den = M._arrays
    d, N = M.d, M.N
    rest = [c for c in range(N) if c not in subset]
    ks = _keys(basis, subset, d)
    group = comp * d ** len(rest) + _keys(basis, rest, d)
    w = scale[comp]
    diag = np.zeros(d ** len(subset), dtype=re.dtype)
    np.add.at(diag, ks, w * (re * re + im * im))
    offdiag: dict[tuple[int, int], tuple[int, int]] = {}
    order = np.argsort(group, kind="stable")
    g_sorted = group[order]
    starts = np.flatnonzero(np.r_[True, g_sorted[1:] != g_sorted[:-1]])
    sizes = np.diff(np.r_[starts, len(g_sorted)])
    for start, size in zip(starts[sizes > 1], sizes[sizes > 1]):
        members = order[start : start + size]
        for a, b in itertools.permutations(members.tolist(), 2):
            # rho_S[u, v] += w * n_a * conj(n_b)
            key = (int(ks[a]), int(ks[b]))
            wa = w[a]
            pr = wa * (re[a] * re[b] + im[a] * im[b])
            pi = wa * (im[a] * re[b] - re[a] * im[b])
            old = offdiag.get(key, (0, 0))
            offdiag[key] = (int(old[0] + pr), int(old[1] + pi))
    return ReducedDensity(tuple(subset), d, int(den), diag, offdiag)


def reduced_density(state, subset: Sequence[int], max_dim: int = DEFAULT_MAX_REDUCED_DIM) -> ReducedDensity:
    """Exact partial trace of a pure state or uniform mixture onto ``subset``."""
    M = as_mixture(state)
    subset = tuple(int(s) for s in subset)
    if len(set(subset)) != len(subset) or any(not 0 <= s < M.N for s in subset):
        raise ValueError(f"bad subset {subset} for N={M.N}")
    if M.d ** len(subset) > max_dim:
        raise ValueError(f"reduced dimension {M.d ** len(subset)} exceeds guard {max_dim}")
    return _reduce_sparse(M, subset)


def reduced_density_dense(rho: DenseOperator, subset: Sequence[int], d: int = 2) -> ReducedDensity:
    """Exact partial trace of a dense operator on N qudits (big-endian basis order)."""
    dim = rho.dim
    N = round(math.log(dim, d))
    if d**N != dim:
        raise ValueError(f"dimension {dim} is not a power of {d}")
    if N > MAX_DENSE_QUBITS:
        raise ValueError(f"dense partial trace limited to N <= {MAX_DENSE_QUBITS}")
    subset = tuple(int(s) for s in subset)
    rest = [c for c in range(N) if c not in subset]
    t, b = len(subset), len(rest)
    perm = list(subset) + list(rest)
    out = []
    for part in (rho.re, rho.im):
        tens = part.reshape([d] * (2 * N)).transpose(perm + [N + p for p in perm])
        tens = tens.reshape(d**t, d**b, d**t, d**b)
        out.append(np.einsum("ibjb->ij", tens))
    re, im = out
    offdiag = {}
    for u, v in zip(*np.nonzero((re != 0) | (im != 0))):
        if u != v:
            offdiag[(int(u), int(v))] = (int(re[u, v]), int(im[u, v]))
    if np.any(np.diag(im)):
        raise ValueError("operator has a non-real diagonal")
    return ReducedDensity(subset, d, rho.den, np.diag(re).copy(), offdiag)


def _reducer(state, d: int):
    if isinstance(state, DenseOperator):
        N = round(math.log(state.dim, d))
        return N, d, lambda S: reduced_density_dense(state, S, d)
    M = as_mixture(state)
    return M.N, M.d, lambda S: _reduce_sparse(M, S)


def find_nonuniform_subset(state, k: int, threads: int = 1, d: int = 2):
    """First k-subset (lexicographic) whose reduction is not I/d**k, with the
    offending entry; ``None`` when the state is k-uniform.

    ``d`` is only consulted for dense operators.
    """
    N, d, reduce_on = _reducer(state, d)
    if not 0 <= k <= N:
        raise ValueError(f"k={k} outside 0..{N}")
    subsets = list(itertools.combinations(range(N), k))

    def probe(S):
        dev = reduce_on(S).first_deviation()
        return None if dev is None else (S, dev)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(probe, subsets))
        return next((r for r in results if r is not None), None)
    for S in subsets:
        hit = probe(S)
        if hit is not None:
            return hit
    return None


def is_k_uniform(state, k: int, threads: int = 1, d: int = 2) -> bool:
    return find_nonuniform_subset(state, k, threads, d) is None


def max_uniformity(state, threads: int = 1, d: int = 2, start: int | None = None) -> int:
    """Largest k < N with every k-party reduction maximally mixed (0 if none).

    A reduction of I/d**k is again maximally mixed, so uniformity is monotone
    in k.  ``start`` lets the scan begin at a level already claimed; if the
    claim fails the scan restarts from 1.
    """
    N, _, _ = _reducer(state, d)
    k = 0
    if start is not None and 1 <= start < N and is_k_uniform(state, start, threads, d):
        k = start
    while k + 1 < N and is_k_uniform(state, k + 1, threads, d):
        k += 1
    return k


# ---------------------------------------------------------------------------
# purity


def gram_overlaps(M: MixedState) -> dict[tuple[int, int], Fraction]:
    """Nonzero |<phi_i|phi_j>|^2 for i <= j, found through shared basis strings."""
    basis, re, im, comp, _, _ = M._arrays
    key = _keys(basis, range(M.N), M.d)
    order = np.lexsort((comp, key))
    k_sorted = key[order]
    starts = np.flatnonzero(np.r_[True, k_sorted[1:] != k_sorted[:-1]])
    ends = np.r_[starts[1:], len(order)]
    inner: dict[tuple[int, int], list[int]] = {}
    for start, end in zip(starts, ends):
        members = order[start:end].tolist()
        for a in members:
            for b in members:
                i, j = int(comp[a]), int(comp[b])
                if i > j:
                    continue
                acc = inner.setdefault((i, j), [0, 0])
                # conj(n_a) * n_b
                acc[0] += int(re[a] * re[b] + im[a] * im[b])
                acc[1] += int(re[a] * im[b] - im[a] * re[b])
    norms = [c.norm2 for c in M.components]
    return {
        (i, j): Fraction(a * a + b * b, norms[i] * norms[j])
        for (i, j), (a, b) in inner.items()
        if a or b
    }


def mixture_purity(M) -> Fraction:
    """Tr(rho^2) = (1/m^2) sum_ij |<phi_i|phi_j>|^2, from the Gram matrix."""
    M = as_mixture(M)
    total = Fraction(0)
    for (i, j), val in gram_overlaps(M).items():
        total += val if i == j else 2 * val
    return total / (M.m * M.m)


def lower_purity(M: MixedState, party: int, shift: int = 1) -> MixedState:
    """Append a copy of every component with one party cyclically shifted.

    When the copies are orthogonal to everything already present the purity
    halves; otherwise a NonOrthogonalWarning is issued and the mixture is
    returned as built.
    """
    M = as_mixture(M)
    if not 1 <= shift < M.d:
        raise ValueError(f"shift must be in 1..{M.d - 1}")
    if not 0 <= party < M.N:
        raise ValueError(f"party {party} out of range")
    copies = tuple(c.shifted(party, shift) for c in M.components)
    out = MixedState(M.components + copies)
    overlaps = gram_overlaps(out)
    if any(i != j for i, j in overlaps):
        warnings.warn(
            "shifted copies overlap the existing components; purity does not halve",
            NonOrthogonalWarning,
            stacklevel=2,
        )
    return out


def dense_from_mixture(M: MixedState) -> DenseOperator:
    """rho as a dense operator (small N only); used to cross-check pipelines.

    The normalisation 1/sqrt(S_i) squares to 1/S_i, so rho has rational entries.
    """
    M = as_mixture(M)
    dim = M.d**M.N
    if dim > 2**MAX_DENSE_QUBITS:
        raise ValueError("mixture too large for a dense operator")
    basis, re, im, comp, scale, den = M._arrays
    idx = _keys(basis, range(M.N), M.d)
    out_re = np.zeros((dim, dim), dtype=np.int64)
    out_im = np.zeros((dim, dim), dtype=np.int64)
    for i in range(M.m):
        sel = np.flatnonzero(comp == i)
        u, a_re, a_im = idx[sel], re[sel].astype(np.int64), im[sel].astype(np.int64)
        w = int(scale[i])
        out_re[np.ix_(u, u)] += w * (np.outer(a_re, a_re) + np.outer(a_im, a_im))
        out_im[np.ix_(u, u)] += w * (np.outer(a_im, a_re) - np.outer(a_re, a_im))
    return DenseOperator(out_re, out_im, int(den))
