"""Generative side: difference schemes, code arrays, partitions, product arrays.

Nothing returned here is trusted on the strength of its formula.  Each
builder hands its output to the oa_core checks before returning it and raises
ConstructionError when a check fails.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import gf_rank, gfq_tables, is_prime_power, symbol_addition, symbol_negation
from .oa_core import (
    OrthogonalArray,
    OrthogonalPartition,
    encode_rows,
    full_factorial,
    kronecker_sum_expand,
    max_strength,
    min_hamming_distance,
    verify_partition,
    verify_strength,
    verify_theorem3,
)

FOUND, NONEXISTENT, BUDGET = "found", "nonexistent", "budget"
MAX_CODEWORDS = 2**20


class ConstructionError(ValueError):
    """A construction's output failed verification or its preconditions."""


# ---------------------------------------------------------------------------
# difference schemes


def _coset_keys(rows: np.ndarray, cols: Sequence[int], d: int, group: str) -> np.ndarray:
    """Index of the coset of the diagonal subgroup containing each projected row.

    A tuple t is normalised to (t_2 - t_1, ..., t_k - t_1) and read in base d.
    """
    add, neg = symbol_addition(d, group), symbol_negation(d, group)
    first = neg[rows[:, cols[0]]]
    key = np.zeros(rows.shape[0], dtype=np.int64)
    for c in cols[1:]:
        key = key * d + add[rows[:, c], first]
    return key


def verify_difference_scheme(D, k: int, d: int | None = None, group: str = "field") -> bool:
    """Every k-column projection spreads the rows evenly over the diagonal cosets."""
    if isinstance(D, DifferenceScheme):
        rows, d, group = D.entries, D.d, D.group
    else:
        rows = np.asarray(D, dtype=np.int64)
        if d is None:
            raise ValueError("d is required for a bare array")
    r, N = rows.shape
    if not 1 <= k <= N:
        raise ValueError(f"strength {k} outside 1..{N}")
    cosets = d ** (k - 1)
    if r % cosets:
        return False
    want = r // cosets
    for cols in itertools.combinations(range(N), k):
        counts = np.bincount(_coset_keys(rows, cols, d, group), minlength=cosets)
        if counts.min() != want or counts.max() != want:
            return False
    return True


@dataclass(frozen=True, eq=False)
class DifferenceScheme:
    """D_k(r, N, d): r x N array over an abelian group of order d.

    ``group`` names the symbol group ("field" or "cyclic", see
    ``symbol_addition``); ``provenance`` records where the rows came from.
    """

    entries: np.ndarray
    d: int
    k: int
    provenance: str = "unspecified"
    group: str = "field"

    def __post_init__(self):
        rows = np.array(self.entries, dtype=np.int64)
        if rows.ndim != 2 or rows.size == 0:
            raise ValueError("a difference scheme needs a nonempty 2-d array")
        if rows.min() < 0 or rows.max() >= self.d:
            raise ValueError(f"entries must lie in 0..{self.d - 1}")
        rows.setflags(write=False)
        object.__setattr__(self, "entries", rows)
        if not verify_difference_scheme(rows, self.k, self.d, self.group):
            raise ConstructionError(f"array is not a difference scheme of strength {self.k}")

    @property
    def r(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DifferenceScheme):
            return NotImplemented
        return (self.d, self.k, self.group) == (other.d, other.k, other.group) and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash((self.d, self.k, self.entries.tobytes()))

    def __repr__(self):
        return f"DifferenceScheme(D_{self.k}({self.r},{self.N},{self.d}), provenance={self.provenance!r})"


def normalize_scheme(rows: np.ndarray, d: int, group: str = "field") -> np.ndarray:
    """Canonical form used by the search: first row zero, first column zero, rows sorted.

    Column shifts and per-row diagonal shifts both permute diagonal cosets,
    so the result is a difference scheme iff the input is.
    """
    add, neg = symbol_addition(d, group), symbol_negation(d, group)
    rows = np.asarray(rows, dtype=np.int64)
    out = add[rows, neg[rows[0]][None, :]]
    out = add[out, neg[out[:, :1]]]
    order = np.argsort(encode_rows(out, d), kind="stable")
    return out[order]


@dataclass
class SearchResult:
    status: str  # FOUND, NONEXISTENT or BUDGET
    result: object = None
    nodes: int = 0
    seconds: float = 0.0

    @property
    def found(self) -> bool:
        return self.status == FOUND


class _Budget:
    def __init__(self, seconds: float | None, nodes: int | None):
        self.deadline = None if seconds is None else time.monotonic() + seconds
        self.node_limit = nodes
        self.nodes = 0
        self.start = time.monotonic()

    def tick(self) -> bool:
        """Count a node; False once either limit is hit."""
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            return False
        if self.deadline is not None and self.nodes % 1024 == 0 and time.monotonic() > self.deadline:
            return False
        return True

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.start


class _BudgetExhausted(Exception):
    pass


def search_difference_scheme(
    r: int,
    N: int,
    d: int,
    k: int,
    budget_seconds: float | None = 10.0,
    node_limit: int | None = None,
    group: str = "field",
) -> SearchResult:
    """Backtracking search for a D_k(r, N, d) with pairwise distinct rows.

    Rows are normalised (first row zero, first column zero) and chosen in
    strictly increasing order, so each scheme is visited once up to row order
    and those shifts.  Distinct normalised rows is exactly the condition that
    the expanded array D (+) (d) has no repeated runs.  A
    (k-subset, coset) pair is closed once it holds r/d**(k-1) rows and its
    members are struck from the candidate set.  Exhausting the tree proves
    nonexistence of such a scheme.
    """
    if not 2 <= k <= N:
        raise ValueError("need 2 <= k <= N")
    cosets = d ** (k - 1)
    if r % cosets:
        raise ValueError(f"r={r} is not divisible by d^(k-1)={cosets}")
    cap = r // cosets
    budget = _Budget(budget_seconds, node_limit)

    # candidates: vectors with first coordinate 0, indexed by base-d key of the rest
    n_cand = d ** (N - 1)
    cand = np.zeros((n_cand, N), dtype=np.int64)
    cand[:, 1:] = np.array(list(itertools.product(range(d), repeat=N - 1)), dtype=np.int64).reshape(n_cand, N - 1)
    subsets = list(itertools.combinations(range(N), k))
    # coset_of[s][c] = coset of candidate c on subset s; members[s][j] = bitset of candidates
    coset_of = [_coset_keys(cand, S, d, group).tolist() for S in subsets]
    members = []
    for s in range(len(subsets)):
        bits = [0] * cosets
        for c, j in enumerate(coset_of[s]):
            bits[j] |= 1 << c
        members.append(bits)
    counts = [[0] * cosets for _ in subsets]
    chosen: list[int] = []
    full_mask = (1 << n_cand) - 1

    def place(c: int, alive: int) -> int:
        for s in range(len(subsets)):
            j = coset_of[s][c]
            counts[s][j] += 1
            if counts[s][j] == cap:
                alive &= ~members[s][j]
        return alive

    def unplace(c: int) -> None:
        for s in range(len(subsets)):
            counts[s][coset_of[s][c]] -= 1

    def feasible(alive: int, need: int) -> bool:
        # every coset still needs cap - count rows from the live candidates
        for s in range(len(subsets)):
            row = counts[s]
            for j in range(cosets):
                deficit = cap - row[j]
                if deficit and (alive & members[s][j]).bit_count() < deficit:
                    return False
        return need <= alive.bit_count()

    def extend(alive: int) -> bool:
        if not budget.tick():
            raise _BudgetExhausted
        need = r - len(chosen)
        if need == 0:
            return True
        if not feasible(alive, need):
            return False
        while alive:
            low = alive & -alive
            c = low.bit_length() - 1
            alive ^= low
            chosen.append(c)
            # later rows must have larger keys: drop everything <= c
            nxt = place(c, alive)
            if extend(nxt):
                return True
            unplace(c)
            chosen.pop()
        return False

    try:
        chosen.append(0)
        ok = extend(place(0, full_mask & ~1))
    except _BudgetExhausted:
        return SearchResult(BUDGET, None, budget.nodes, budget.elapsed)
    if not ok:
        return SearchResult(NONEXISTENT, None, budget.nodes, budget.elapsed)
    scheme = DifferenceScheme(cand[chosen], d, k, "searched", group)
    return SearchResult(FOUND, scheme, budget.nodes, budget.elapsed)


def generic_scheme_odd_prime_power(d: int) -> DifferenceScheme:
    """D_3(d**2, d+1, d) from quadratic evaluation over GF(d).

    Row (a, b) has entry a*c + b*c**2 in column c of GF(d), and b in the
    extra column at infinity.  Taken literally these rows plus the constants
    do not form the doubly extended Reed-Solomon code, because the all-ones
    word is not in it.  Column c is therefore divided by c**2 - nu for a
    non-square nu.  That is the codeword of full weight, so after scaling the
    constants are codewords and the expanded array is MDS of strength 3.
    The unscaled rows are tried first.
    """
    if d % 2 == 0 or not is_prime_power(d) or d > 9:
        raise ValueError(f"d={d} must be an odd prime power <= 9")
    t = gfq_tables(d)

    def rows_with(scale):
        rows = []
        for a in range(d):
            for b in range(d):
                row = [int(t.mul[scale[c], t.add[t.mul[a, c], t.mul[b, t.mul[c, c]]]]) for c in range(d)]
                rows.append(row + [b])
        return np.array(rows)

    squares = {int(t.mul[c, c]) for c in range(d)}
    nu = min(set(range(1, d)) - squares)
    scaled = [int(t.inv[t.add[t.mul[c, c], t.neg[nu]]]) for c in range(d)]
    for scale, tag in (([1] * d, "generic-construction"), (scaled, "generic-construction:scaled")):
        rows = rows_with(scale)
        if verify_difference_scheme(rows, 3, d, "field"):
            return DifferenceScheme(rows, d, 3, tag, "field")
    raise ConstructionError(f"quadratic construction failed verification for d={d}")


def single_parity_scheme(N: int, q: int, k: int | None = None) -> DifferenceScheme:
    """Linear D_{N-1}(q**(N-2), N, q): the words of v-perp with first coordinate 0.

    v is a full-weight vector with coordinate sum 0, so v-perp contains the
    all-ones word and the strength-(N-1) condition on v-perp reduces to its
    dual being spanned by a full-weight word.  For q = 2 this needs N even.
    ``k`` may request any strength up to N - 1.
    """
    if N < 3:
        raise ValueError("need N >= 3")
    k = N - 1 if k is None else k
    if not 2 <= k <= N - 1:
        raise ValueError(f"strength {k} outside 2..{N - 1}")
    t = gfq_tables(q)
    v = None
    for head in itertools.product(range(1, q), repeat=N - 1):
        s = 0
        for x in head:
            s = int(t.add[s, x])
        if s != 0:
            v = list(head) + [int(t.neg[s])]
            break
    if v is None:
        raise ValueError(f"no full-weight word with zero coordinate sum for N={N}, q={q}")
    # basis of {x : x.v = 0, x_0 = 0}: e_i - (v_i / v_{N-1}) e_{N-1} for 1 <= i <= N-2
    last_inv = int(t.inv[v[-1]])
    basis = []
    for i in range(1, N - 1):
        row = [0] * N
        row[i] = 1
        row[-1] = int(t.neg[t.mul[v[i], last_inv]])
        basis.append(row)
    rows = _span(np.array(basis, dtype=np.int64).reshape(-1, N), q)
    return DifferenceScheme(rows, q, k, "generic-construction", "field")


def _span(gen: np.ndarray, q: int) -> np.ndarray:
    """All q**kappa GF(q)-combinations of the generator rows, in base-q coefficient order."""
    t = gfq_tables(q)
    kappa, n = gen.shape
    coeffs = np.array(list(itertools.product(range(q), repeat=kappa)), dtype=np.int64).reshape(-1, kappa)
    words = np.zeros((len(coeffs), n), dtype=np.int64)
    for i in range(kappa):
        words = t.add[words, t.mul[coeffs[:, i : i + 1], gen[i][None, :]]]
    return words


def scheme_to_mixed_state_blocks(D: DifferenceScheme) -> OrthogonalPartition:
    """Parent D (+) (d) with blocks a_i (+) (d); verified as a mixed-state partition at D.k."""
    if D.k >= D.N:
        raise ValueError(f"k={D.k} must be below N={D.N}")
    parent = OrthogonalArray(kronecker_sum_expand(D.entries, D.d, D.group), D.d, D.k)
    blocks = [tuple(range(i * D.d, (i + 1) * D.d)) for i in range(D.r)]
    part = OrthogonalPartition(parent, blocks, 1)
    report = verify_theorem3(parent, part, D.k)
    if not report or any(x != D.N for x in report.block_distances):
        raise ConstructionError(f"expanded scheme fails the partition checks: {report.failures}")
    if not verify_partition(part):
        raise ConstructionError("a block a_i (+) (d) is not a strength-1 array")
    return part


# ---------------------------------------------------------------------------
# linear codes


@dataclass(frozen=True, eq=False)
class LinearCodeSpec:
    q: int
    n: int
    kappa: int
    generator: np.ndarray
    provenance: str = "unspecified"
    claimed_strength: int | None = None
    claimed_md: int | None = None

    def __post_init__(self):
        g = np.array(self.generator, dtype=np.int64).reshape(-1, self.n)
        if g.shape != (self.kappa, self.n):
            raise ValueError(f"generator has shape {g.shape}, expected {(self.kappa, self.n)}")
        if g.min() < 0 or g.max() >= self.q:
            raise ValueError(f"generator entries must lie in 0..{self.q - 1}")
        if gf_rank(g, self.q) != self.kappa:
            raise ValueError("generator rows are linearly dependent")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    def __eq__(self, other):
        if not isinstance(other, LinearCodeSpec):
            return NotImplemented
        return (
            (self.q, self.n, self.kappa, self.claimed_strength, self.claimed_md)
            == (other.q, other.n, other.kappa, other.claimed_strength, other.claimed_md)
            and np.array_equal(self.generator, other.generator)
        )

    __hash__ = None


def code_to_oa(spec: LinearCodeSpec) -> OrthogonalArray:
    """All codewords as rows, with strength and MD measured and checked against the claims."""
    if spec.q**spec.kappa > MAX_CODEWORDS:
        raise ValueError(f"{spec.q}^{spec.kappa} codewords exceed the enumeration guard")
    words = _span(spec.generator, spec.q)
    strength = max_strength(words, spec.q)
    md = min_hamming_distance(words)
    if spec.claimed_strength is not None and strength != spec.claimed_strength:
        raise ConstructionError(f"measured strength {strength}, claimed {spec.claimed_strength}")
    if spec.claimed_md is not None and md != spec.claimed_md:
        raise ConstructionError(f"measured MD {md}, claimed {spec.claimed_md}")
    return OrthogonalArray(words, spec.q, strength)


# ---------------------------------------------------------------------------
# partitions from arrays


def drop_column(A: OrthogonalArray, col: int) -> OrthogonalArray:
    if A.N < 2:
        raise ValueError("cannot drop the only column")
    if not 0 <= col < A.N:
        raise ValueError(f"column {col} out of range")
    claim = None if A.claimed_strength is None else min(A.claimed_strength, A.N - 1)
    # OrthogonalArray raises DuplicateRowsError if two runs collapse
    return OrthogonalArray(np.delete(A.entries, col, axis=1), A.d, claim)


def prefix_partition(A: OrthogonalArray, x: int, k: int) -> OrthogonalPartition:
    """Group runs by their first x symbols and drop those columns.

    Each block is an OA of strength k - x on the remaining N - x columns, and
    within a block the distances are unchanged because the prefixes agree.
    """
    if not 1 <= x <= k:
        raise ValueError(f"x={x} outside 1..{k}")
    if A.N - x <= k:
        raise ValueError(f"N - x = {A.N - x} must exceed k = {k}")
    if not verify_strength(A, k):
        raise ConstructionError(f"array lacks strength {k}")
    if min_hamming_distance(A, at_least=k + 1) < k + 1:
        raise ConstructionError(f"array has MD below {k + 1}")
    prefix = encode_rows(A.entries[:, :x], A.d)
    order = np.argsort(prefix, kind="stable")
    trimmed = OrthogonalArray(A.entries[order, x:], A.d, k)
    size = A.r // A.d**x
    blocks = [tuple(range(i * size, (i + 1) * size)) for i in range(A.d**x)]
    part = OrthogonalPartition(trimmed, blocks, k - x)
    report = verify_theorem3(trimmed, part, k)
    if not report or not verify_partition(part):
        raise ConstructionError(f"prefix partition fails verification: {report.failures}")
    return part


def _is_closed(rows: np.ndarray, d: int, group: str) -> bool:
    add = symbol_addition(d, group)
    keys = set(encode_rows(rows, d).tolist())
    if 0 not in keys:
        return False
    for a in rows:
        if not set(encode_rows(add[a[None, :], rows], d).tolist()) <= keys:
            return False
    return True


def coset_partition(sub, d: int | None = None, group: str = "field", block_strength: int | None = None) -> OrthogonalPartition:
    """Partition the full factorial d**N into the additive cosets of ``sub``.

    Cosets are listed in order of their smallest unused representative and
    each keeps the row order of ``sub``.  Blocks inherit the distance and
    strength of ``sub``; both are re-measured.
    """
    if isinstance(sub, OrthogonalArray):
        rows, d = sub.entries, sub.d
    else:
        rows = np.asarray(sub, dtype=np.int64)
        if d is None:
            raise ValueError("d is required for a bare array")
    if not _is_closed(rows, d, group):
        raise ConstructionError("subarray is not an additive subgroup")
    N = rows.shape[1]
    add = symbol_addition(d, group)
    ambient = full_factorial(N, d).entries
    assigned = np.zeros(len(ambient), dtype=bool)
    ordered = []
    for idx in range(len(ambient)):
        if assigned[idx]:
            continue
        coset = add[ambient[idx][None, :], rows]
        assigned[encode_rows(coset, d)] = True
        ordered.append(coset)
    parent = OrthogonalArray(np.concatenate(ordered), d)
    s = len(rows)
    blocks = [tuple(range(i * s, (i + 1) * s)) for i in range(len(ordered))]
    if block_strength is None:
        block_strength = max_strength(rows, d)
    part = OrthogonalPartition(parent, blocks, block_strength)
    if not verify_partition(part):
        raise ConstructionError("a coset fails the block strength")
    return part


# ---------------------------------------------------------------------------
# product construction


def product_construction(PA: OrthogonalPartition, PC: OrthogonalPartition) -> tuple[OrthogonalArray, list[tuple[int, int, int]]]:
    """Stack [A_i x 1, 1 x C_i] over i.

    Returns the array and, for each i, ``(offset, |A_i|, |C_i|)`` locating the
    i-th super-block: row offset + a*|C_i| + c pairs a-th row of A_i with
    c-th row of C_i.
    """
    if PA.m != PC.m:
        raise ValueError(f"block counts differ: {PA.m} vs {PC.m}")
    if PA.parent.d != PC.parent.d:
        raise ValueError("symbol counts differ")
    parts, layout, offset = [], [], 0
    for i in range(PA.m):
        a, c = PA.block_rows(i), PC.block_rows(i)
        left = np.repeat(a, len(c), axis=0)
        right = np.tile(c, (len(a), 1))
        parts.append(np.hstack([left, right]))
        layout.append((offset, len(a), len(c)))
        offset += len(a) * len(c)
    M = OrthogonalArray(np.concatenate(parts), PA.parent.d)
    return M.with_claim(max_strength(M)), layout


def diagonal_repartition(n_a: int, n_c: int, offset: int = 0) -> list[tuple[int, ...]]:
    """Split a super-block [A x 1, 1 x C] into |C| blocks of |A| rows.

    C's rows are cut into bands of |A| consecutive rows; block (band b, shift s)
    pairs a_i with c_{b|A| + ((i + s) mod |A|)}.  Indices refer to the
    layout of ``product_construction``.
    """
    if n_c % n_a:
        raise ValueError(f"|A|={n_a} does not divide |C|={n_c}")
    blocks = []
    for band in range(n_c // n_a):
        for s in range(n_a):
            blocks.append(tuple(offset + i * n_c + band * n_a + (i + s) % n_a for i in range(n_a)))
    return blocks


@dataclass
class ProductReport:
    array: OrthogonalArray
    partition: OrthogonalPartition
    strength: int
    block_distances: list = field(default_factory=list)


def example16_construction(scheme: DifferenceScheme, k: int = 6) -> ProductReport:
    """The 9-ququart route: coset partitions of two arrays taken from a
    D_3(16,6,4) scheme, their product, and the diagonal split of each super-block.
    """
    if scheme.d != 4 or scheme.entries.shape != (16, 6):
        raise ValueError("expects a D_3(16,6,4) scheme")
    base = scheme.entries[:, 1:]  # the 16 runs of the 5-column array
    PA = coset_partition(OrthogonalArray(base[:, :4], 4), group=scheme.group)
    # B = base (+) (4) listed band by band, band l being l (+) base
    add = symbol_addition(4, scheme.group)
    B = OrthogonalArray(np.concatenate([add[l, base] for l in range(4)]), 4)
    PC = coset_partition(B, group=scheme.group)
    M, layout = product_construction(PA, PC)
    blocks = []
    for offset, n_a, n_c in layout:
        blocks.extend(diagonal_repartition(n_a, n_c, offset))
    part = OrthogonalPartition(M, blocks, 0)
    report = verify_theorem3(M, part, k)
    if not report:
        raise ConstructionError(f"product construction fails: {report.failures}")
    return ProductReport(M, part, M.claimed_strength, report.block_distances)


# ---------------------------------------------------------------------------
# partition search


def partition_search(
    A: OrthogonalArray,
    m: int,
    k: int,
    block_strength: int | None = None,
    budget_seconds: float | None = 60.0,
    node_limit: int | None = None,
) -> SearchResult:
    """Exact-cover search for m blocks of r/m runs with pairwise distance >= k+1.

    Each new block starts at the lowest unassigned run and grows in
    increasing row order through the compatibility graph.  With
    ``block_strength`` set, completed blocks must also be OAs of that strength.
    """
    r = A.r
    if m < 1 or r % m:
        raise ValueError(f"m={m} must divide r={r}")
    s = r // m
    budget = _Budget(budget_seconds, node_limit)
    rows = A.entries
    compat = []
    for i in range(r):
        dist = (rows != rows[i]).sum(axis=1)
        bits = 0
        for j in np.flatnonzero(dist >= k + 1).tolist():
            bits |= 1 << j
        compat.append(bits)
    blocks: list[list[int]] = []

    def block_ok(block: list[int]) -> bool:
        return block_strength is None or verify_strength(rows[block], block_strength, A.d)

    def grow(block: list[int], cand: int, free: int) -> bool:
        if not budget.tick():
            raise _BudgetExhausted
        if len(block) == s:
            if not block_ok(block):
                return False
            blocks.append(list(block))
            if cover(free):
                return True
            blocks.pop()
            return False
        if cand.bit_count() < s - len(block):
            return False
        while cand:
            low = cand & -cand
            j = low.bit_length() - 1
            cand ^= low
            block.append(j)
            if grow(block, cand & compat[j], free & ~low):
                return True
            block.pop()
            if cand.bit_count() < s - len(block):
                return False
        return False

    def cover(free: int) -> bool:
        if not free:
            return True
        low = free & -free
        i = low.bit_length() - 1
        rest = free & ~low
        return grow([i], rest & compat[i], rest)

    try:
        ok = cover((1 << r) - 1)
    except _BudgetExhausted:
        return SearchResult(BUDGET, None, budget.nodes, budget.elapsed)
    if not ok:
        return SearchResult(NONEXISTENT, None, budget.nodes, budget.elapsed)
    part = OrthogonalPartition(A, [tuple(b) for b in blocks], block_strength or 0)
    return SearchResult(FOUND, part, budget.nodes, budget.elapsed)
