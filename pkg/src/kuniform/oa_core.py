"""Orthogonal arrays: strength, Hamming distance, partitions, purity bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import symbol_addition

INF = math.inf


class DuplicateRowsError(ValueError):
    pass


class PartitionError(ValueError):
    pass


def _as_rows(A) -> np.ndarray:
    if isinstance(A, OrthogonalArray):
        return A.entries
    rows = np.asarray(A, dtype=np.int64)
    if rows.ndim != 2:
        raise ValueError(f"expected a 2-d array of symbols, got shape {rows.shape}")
    return rows


def _symbols(A, d: int | None) -> int:
    if isinstance(A, OrthogonalArray):
        return A.d
    if d is None:
        rows = _as_rows(A)
        return int(rows.max()) + 1 if rows.size else 1
    return d


def encode_rows(rows: np.ndarray, d: int) -> np.ndarray:
    """Base-d integer key of each row (first column most significant)."""
    key = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(rows.shape[1]):
        key = key * d + rows[:, c]
    return key


@dataclass(frozen=True, eq=False)
class OrthogonalArray:
    """An r x N array over the symbols 0..d-1 with no repeated rows.

    ``claimed_strength`` is what the source asserts; nothing here trusts it.
    """

    entries: np.ndarray
    d: int
    claimed_strength: int | None = None

    def __post_init__(self):
        rows = np.array(self.entries, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError(f"OA entries must be 2-d, got shape {rows.shape}")
        if rows.size and (rows.min() < 0 or rows.max() >= self.d):
            raise ValueError(f"OA entries must lie in 0..{self.d - 1}")
        if len(np.unique(encode_rows(rows, self.d))) != rows.shape[0]:
            raise DuplicateRowsError("OA contains two identical rows")
        rows.setflags(write=False)
        object.__setattr__(self, "entries", rows)

    @property
    def r(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other):
        if not isinstance(other, OrthogonalArray):
            return NotImplemented
        return (
            self.d == other.d
            and self.claimed_strength == other.claimed_strength
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.d, self.entries.shape, self.entries.tobytes()))

    def __repr__(self):
        return f"OrthogonalArray(r={self.r}, N={self.N}, d={self.d}, claimed_strength={self.claimed_strength})"

    def rows(self, indices: Iterable[int]) -> np.ndarray:
        return self.entries[list(indices)]

    def with_claim(self, k: int | None) -> "OrthogonalArray":
        return OrthogonalArray(self.entries, self.d, k)


def full_factorial(N: int, d: int) -> OrthogonalArray:
    grid = np.array(list(itertools.product(range(d), repeat=N)), dtype=np.int64).reshape(-1, N)
    return OrthogonalArray(grid, d, N)


# ---------------------------------------------------------------------------
# strength


def verify_strength(A, t: int, d: int | None = None) -> bool:
    """True iff every t-column projection hits each of the d**t tuples r/d**t times."""
    rows = _as_rows(A)
    d = _symbols(A, d)
    r, N = rows.shape
    if not 0 <= t <= N:
        raise ValueError(f"strength {t} outside 0..{N}")
    if t == 0:
        return True
    if r % d**t:
        return False
    want = r // d**t
    for cols in itertools.combinations(range(N), t):
        counts = np.bincount(encode_rows(rows[:, cols], d), minlength=d**t)
        if counts.min() != want or counts.max() != want:
            return False
    return True


def max_strength(A, d: int | None = None) -> int:
    rows = _as_rows(A)
    d = _symbols(A, d)
    t = 0
    # strength is monotone, so the first failure ends the scan
    while t < rows.shape[1] and verify_strength(rows, t + 1, d):
        t += 1
    return t


# ---------------------------------------------------------------------------
# Hamming distance


def min_hamming_distance(A, at_least: int | None = None):
    """Smallest Hamming distance between distinct rows; ``INF`` for one row.

    With ``at_least=x`` the scan stops at the first pair closer than x and
    returns that pair's distance, which is enough to decide ``MD >= x``.
    """
    rows = _as_rows(A)
    r = rows.shape[0]
    best = INF
    for i in range(r - 1):
        dist = int((rows[i + 1 :] != rows[i]).sum(axis=1).min())
        if dist < best:
            best = dist
            if at_least is not None and best < at_least:
                return best
    return best


def md_at_least(A, x: int) -> bool:
    return min_hamming_distance(A, at_least=x) >= x


def block_min_distances(rows: np.ndarray, blocks: Sequence[Sequence[int]]) -> list:
    """Minimal Hamming distance of each block of row indices, vectorised per block size."""
    out: list = [None] * len(blocks)
    by_size: dict[int, list[int]] = {}
    for i, b in enumerate(blocks):
        by_size.setdefault(len(b), []).append(i)
    for size, ids in by_size.items():
        if size <= 1:
            for i in ids:
                out[i] = INF
            continue
        stack = rows[np.array([list(blocks[i]) for i in ids])]  # (nb, size, N)
        iu, ju = np.triu_indices(size, 1)
        dist = (stack[:, iu, :] != stack[:, ju, :]).sum(axis=2).min(axis=1)
        for i, v in zip(ids, dist):
            out[i] = int(v)
    return out


def is_irredundant(A: OrthogonalArray, k: int) -> bool:
    """Deleting any k columns leaves the rows pairwise distinct.

    Computed by explicit deletion and cross-checked against ``MD >= k + 1``.
    """
    if not verify_strength(A, k):
        raise ValueError(f"array does not have strength {k}")
    rows, d, N = A.entries, A.d, A.N
    by_deletion = True
    for removed in itertools.combinations(range(N), k):
        keep = [c for c in range(N) if c not in removed]
        if len(np.unique(encode_rows(rows[:, keep], d))) != A.r:
            by_deletion = False
            break
    by_distance = min_hamming_distance(A) >= k + 1
    if by_deletion != by_distance:
        raise AssertionError("irredundancy by deletion and by distance disagree")
    return by_deletion


# ---------------------------------------------------------------------------
# Kronecker sums


def kronecker_sum_scalar(c: int, A, d: int, group: str = "field") -> np.ndarray:
    """``c (+) A``: add the symbol c to every entry."""
    add = symbol_addition(d, group)
    return add[c, _as_rows(A)]


def kronecker_sum_expand(D, d: int, group: str = "field") -> np.ndarray:
    """``D (+) (d)``: row a_i becomes the d consecutive rows a_i + j, j = 0..d-1."""
    rows = _as_rows(D)
    add = symbol_addition(d, group)
    out = add[np.arange(d)[None, :, None], rows[:, None, :]]  # (r, d, N)
    return out.reshape(-1, rows.shape[1])


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True, eq=False)
class OrthogonalPartition:
    parent: OrthogonalArray
    blocks: tuple[tuple[int, ...], ...]
    block_strength: int = 0

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = np.zeros(self.parent.r, dtype=np.int64)
        for b in blocks:
            for i in b:
                if not 0 <= i < self.parent.r:
                    raise PartitionError(f"row index {i} out of range")
                seen[i] += 1
        if (seen > 1).any():
            raise PartitionError(f"rows {np.flatnonzero(seen > 1)[:5].tolist()} appear in several blocks")
        if (seen == 0).any():
            raise PartitionError(f"rows {np.flatnonzero(seen == 0)[:5].tolist()} are in no block")
        if len({len(b) for b in blocks}) > 1:
            raise PartitionError("blocks have unequal sizes")

    @property
    def m(self) -> int:
        return len(self.blocks)

    def block_rows(self, i: int) -> np.ndarray:
        return self.parent.entries[list(self.blocks[i])]

    def __eq__(self, other):
        if not isinstance(other, OrthogonalPartition):
            return NotImplemented
        return (
            self.parent == other.parent
            and self.blocks == other.blocks
            and self.block_strength == other.block_strength
        )

    def __hash__(self):
        return hash((self.parent, self.blocks, self.block_strength))


def verify_partition(P: OrthogonalPartition) -> bool:
    return all(verify_strength(P.block_rows(i), P.block_strength, P.parent.d) for i in range(P.m))


@dataclass
class Theorem3Report:
    """Outcome of the three mixed-state conditions on an array and its blocks."""

    k: int
    m: int
    strength_ok: bool
    blocks_md_ok: bool
    rows_distinct: bool
    block_distances: list = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.strength_ok and self.blocks_md_ok and self.rows_distinct

    def __bool__(self) -> bool:
        return self.passed

    @property
    def purity(self) -> Fraction:
        return Fraction(1, self.m)


def verify_theorem3(A, partition, k: int, d: int | None = None) -> Theorem3Report:
    """Check the mixed-state conditions: strength k, every block MD >= k+1, distinct rows.

    ``partition`` is an OrthogonalPartition or any sequence of row-index blocks.
    """
    rows = _as_rows(A)
    d = _symbols(A, d)
    blocks = partition.blocks if isinstance(partition, OrthogonalPartition) else [tuple(b) for b in partition]
    failures = []
    strength_ok = verify_strength(rows, k, d)
    if not strength_ok:
        failures.append(f"(i) array does not have strength {k}")
    distances = block_min_distances(rows, blocks)
    bad = [i for i, x in enumerate(distances) if x < k + 1]
    if bad:
        failures.append(f"(ii) blocks {bad[:5]} have MD < {k + 1}")
    distinct = len(np.unique(encode_rows(rows, d))) == rows.shape[0]
    if not distinct:
        failures.append("(iii) array has repeated rows")
    return Theorem3Report(k, len(blocks), strength_ok, not bad, distinct, distances, failures)


# ---------------------------------------------------------------------------
# constructions and bounds


def construct_strength1(N: int, d: int) -> OrthogonalArray:
    """d constant rows: strength 1, MD = N."""
    if N < 2 or d < 2:
        raise ValueError("need N >= 2 and d >= 2")
    return OrthogonalArray(np.repeat(np.arange(d)[:, None], N, axis=1), d, 1)


def _log_exact(s: int, d: int) -> int | None:
    e = 0
    while s > 1 and s % d == 0:
        s //= d
        e += 1
    return e if s == 1 else None


@dataclass(frozen=True)
class OARequirement:
    """Existence of an OA(r, N, d, t) that a partition would need."""

    r: int
    N: int
    d: int
    t: int

    def __str__(self):
        return f"OA({self.r},{self.N},{self.d},{self.t})"


def case_a_block_test(s: int, N: int, d: int, k: int) -> OARequirement | None:
    """A block of s = d**k' rows with MD >= k+1 >= N-k'+1 must be an OA(d**k', N, d, k')."""
    kp = _log_exact(s, d)
    if kp is None or kp < 1:
        return None
    if k + 1 >= N - kp + 1:
        return OARequirement(s, N, d, kp)
    return None


@dataclass
class FeasibilityReport:
    r: int
    N: int
    d: int
    k: int
    k_prime: int
    verdict: str  # "bound", "feasible-unknown" or "infeasible"
    min_blocks: int | None = None
    infeasible_m: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def allows(self, m: int) -> bool:
        return self.r % m == 0 and m not in self.infeasible_m


def bush_bound_excludes(r: int, N: int, d: int, t: int) -> bool:
    """Index-one OA(d**t, N, d, t) with t >= 2 and d <= t needs N <= t + 1 (Bush 1952)."""
    return t >= 2 and r == d**t and d <= t and N > t + 1


def feasibility_bound(
    r: int,
    N: int,
    d: int,
    k: int,
    k_prime: int | None = None,
    existence: dict[OARequirement, bool] | None = None,
) -> FeasibilityReport:
    """Lower-bound the number of blocks m in a partition with block MD >= k+1.

    Candidate m range over divisors of r.  With k' = 0 (k + 1 = N) the
    count test alone caps blocks at d rows.  A candidate is discarded when the
    block size s = r/m violates k'*C(s,2) >= N*s*(s-d)/(2d), when
    N > k'*C(d+1,2) forces s <= d, or when the case-(a) requirement names an
    OA that ``existence`` records as nonexistent.
    """
    if k_prime is None:
        k_prime = N - k - 1
    if k_prime < 0:
        raise ValueError("k' must be non-negative")
    existence = existence or {}
    report = FeasibilityReport(r, N, d, k, k_prime, "feasible-unknown")
    cap_by_count = N > k_prime * math.comb(d + 1, 2)
    if cap_by_count:
        report.notes.append(f"N={N} > k'*C({d + 1},2)={k_prime * math.comb(d + 1, 2)}: blocks have at most {d} rows")
    for m in sorted(m for m in range(1, r + 1) if r % m == 0):
        s = r // m
        reasons = []
        if cap_by_count and s > d:
            reasons.append(f"s={s} > d")
        # k'*C(s,2) >= N*s*(s-d)/(2d), cleared of denominators
        if k_prime * s * (s - 1) * d < N * s * (s - d):
            reasons.append(f"coincidence count fails for s={s}")
        req = case_a_block_test(s, N, d, k)
        if req is not None and existence.get(req) is False:
            reasons.append(f"needs {req}, which does not exist")
        if reasons:
            report.infeasible_m.append(m)
            report.notes.append(f"m={m}: " + "; ".join(reasons))
        elif report.min_blocks is None:
            report.min_blocks = m
    if report.infeasible_m:
        report.verdict = "bound"
    return report
