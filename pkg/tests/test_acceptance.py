"""One test per acceptance criterion; each prints a single CRITERION line."""

import itertools
import time
import warnings
from collections import Counter
from fractions import Fraction
from math import comb

import numpy as np

from conftest import complex_pauli
from kuniform import fixtures, formats, reproduce
from kuniform.algebra import pauli_product
from kuniform.cli import main as cli_main
from kuniform.constructions import (
    drop_column,
    example16_construction,
    partition_search,
    prefix_partition,
    scheme_to_mixed_state_blocks,
    search_difference_scheme,
    verify_difference_scheme,
)
from kuniform.oa_core import (
    OARequirement,
    OrthogonalArray,
    feasibility_bound,
    is_irredundant,
    min_hamming_distance,
    verify_partition,
    verify_strength,
    verify_theorem3,
)
from kuniform.quantum_verify import (
    MixedState,
    NonOrthogonalWarning,
    dense_from_mixture,
    find_nonuniform_subset,
    is_k_uniform,
    lower_purity,
    max_uniformity,
    mixture_from_blocks,
    mixture_purity,
    reduced_density,
    reduced_density_dense,
)
from kuniform.stabilizer import DenseOperator, check_all, pure_decomposition, purity, synthesize_density


class Criterion:
    def __init__(self, number, capsys, limit=None):
        self.number, self.capsys, self.limit = number, capsys, limit
        self.failed: list[str] = []
        self.start = time.perf_counter()

    def check(self, label, ok):
        if not ok:
            self.failed.append(label)
        return ok

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.limit is not None:
            self.check(f"runtime {elapsed:.1f}s < {self.limit}s", elapsed < self.limit)
        verdict = "PASS" if not self.failed else "FAIL"
        detail = f" ({elapsed:.1f}s)" if not self.failed else f" ({elapsed:.1f}s) failed: {'; '.join(self.failed)}"
        with self.capsys.disabled():
            print(f"\nCRITERION {self.number}: {verdict}{detail}")
        assert not self.failed, self.failed


def four_party_reductions_are_quarter(rho, N, k):
    target = DenseOperator.identity(2**k, 2**k)
    return all(reduced_density_dense(rho, S).to_dense() == target for S in itertools.combinations(range(N), k))


def test_criterion_1_example2(capsys):
    c = Criterion(1, capsys, limit=5)
    G = fixtures.load_generator("gen_example2.txt")
    checks = check_all(G)
    c.check("generator checks", checks.commuting and checks.independent and checks.valid and checks.max_k == 4)
    rho = synthesize_density(G)
    c.check("rho is 128x128", rho.dim == 128)
    c.check("rho^2 = rho/8", rho @ rho == rho.scaled(Fraction(1, 8)))
    c.check("purity 1/8", purity(rho) == Fraction(1, 8))
    c.check("35 reductions equal I/16", four_party_reductions_are_quarter(rho, 7, 4) and comb(7, 4) == 35)
    states = pure_decomposition(G)
    c.check("8 states", len(states) == 8)
    c.check("orthonormal", all(a.overlap2(b) == (1 if i == j else 0)
                               for (i, a), (j, b) in itertools.product(enumerate(states), repeat=2)))
    c.check("mixture reconstructs rho", dense_from_mixture(MixedState(tuple(states))) == rho)
    c.finish()


def test_criterion_2_qubit_suite(capsys):
    c = Criterion(2, capsys, limit=60)
    expected = {3: (Fraction(1, 8), 4), 4: (Fraction(1, 8), 4), 5: (Fraction(1, 16), 5),
                6: (Fraction(1, 8), 5), 7: (Fraction(1, 64), 6)}
    for ex, (p, k) in expected.items():
        G = fixtures.load_generator(f"gen_example{ex}.txt")
        rho = synthesize_density(G)
        c.check(f"Ex.{ex} purity {p}", purity(rho) == p)
        c.check(f"Ex.{ex} max_k {k}", check_all(G).max_k == k)
        c.check(f"Ex.{ex} all {k}-party dense reductions", find_nonuniform_subset(rho, k) is None)
        c.check(f"Ex.{ex} not {k + 1}-uniform", find_nonuniform_subset(rho, k + 1) is not None)
    c.finish()


def test_criterion_3_example8(capsys):
    c = Criterion(3, capsys)
    A = fixtures.load_oa("oa_example8.txt")
    c.check("strength 4", verify_strength(A, 4))
    M = mixture_from_blocks(A.entries, [(i,) for i in range(A.r)], 2)
    c.check("purity 1/16", mixture_purity(M) == Fraction(1, 16))
    measured = max_uniformity(M)
    c.check("max uniformity 4", measured == 4)
    row = next(r for r in reproduce.run("qubit") if r.route.startswith("Ex.8"))
    c.check("reported as DISCREPANCY-NOTED", row.status == reproduce.NOTED and "2-uniform" in row.note)
    c.finish()


def test_criterion_4_example9(capsys):
    c = Criterion(4, capsys)
    A1, A2 = fixtures.load_oa("oa_example9_A1.txt"), fixtures.load_oa("oa_example9_A2.txt")
    c.check("MD(A1) = MD(A2) = 4", min_hamming_distance(A1) == min_hamming_distance(A2) == 4)
    stacked = np.vstack([A1.entries, A2.entries])
    c.check("stacked strength 3", verify_strength(stacked, 3, 2))
    M = mixture_from_blocks(stacked, [range(8), range(8, 16)], 2)
    c.check("purity 1/2", mixture_purity(M) == Fraction(1, 2))
    c.check("35 three-party reductions", comb(7, 3) == 35 and is_k_uniform(M, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonOrthogonalWarning)
        low = lower_purity(M, 6)
    c.check("lowered purity 1/4", mixture_purity(low) == Fraction(1, 4))
    c.check("lowered still 3-uniform", is_k_uniform(low, 3))
    c.finish()


# supports printed for the 4-ququart state (third pure state) and the
# 5-ququart state (fourth pure state)
PRINTED_4 = {(0, 2, 3, 2), (1, 3, 2, 3), (2, 0, 1, 0), (3, 1, 0, 1)}
PRINTED_5 = {
    (3, 3, 3, 3, 3), (3, 2, 1, 2, 1), (3, 1, 0, 1, 0), (3, 0, 2, 0, 2),
    (2, 3, 2, 1, 1), (2, 2, 0, 0, 3), (2, 1, 1, 3, 2), (2, 0, 3, 2, 0),
    (1, 3, 1, 0, 0), (1, 2, 3, 1, 2), (1, 1, 2, 2, 3), (1, 0, 0, 3, 1),
    (0, 3, 0, 2, 2), (0, 2, 2, 3, 0), (0, 1, 3, 0, 1), (0, 0, 1, 1, 3),
}


def _supports(built):
    return [{tuple(r) for r in built.parent.entries[list(b)].tolist()} for b in built.blocks]


def test_criterion_5_example12(capsys):
    c = Criterion(5, capsys)
    D = fixtures.load_scheme("ds_example12.txt")
    c.check("printed D_3(16,6,4) verifies", verify_difference_scheme(D.entries, 3, 4))
    P = scheme_to_mixed_state_blocks(D)
    c.check("D(+)(4) is IrOA(64,6,4,3)", P.parent.r == 64 and verify_strength(P.parent, 3) and is_irredundant(P.parent, 3))
    four = reproduce.route_example12_columns(4)
    M4 = mixture_from_blocks(four.parent.entries, four.blocks, 4)
    c.check("16 blocks", len(four.blocks) == 16)
    c.check("4-ququart 3-uniform", is_k_uniform(M4, 3))
    c.check("4-ququart purity 1/16", mixture_purity(M4) == Fraction(1, 16))
    c.check("printed 4-ququart support is a block", PRINTED_4 in _supports(four))
    five = reproduce.route_example12_shift()
    M5 = mixture_from_blocks(five.parent.entries, five.blocks, 4)
    c.check("4 blocks", len(five.blocks) == 4)
    c.check("shift partition checks", verify_theorem3(five.parent, five.blocks, 3).passed)
    c.check("5-ququart 3-uniform", is_k_uniform(M5, 3))
    c.check("5-ququart purity 1/4", mixture_purity(M5) == Fraction(1, 4))
    c.check("printed 5-ququart support is a block", PRINTED_5 in _supports(five))
    c.finish()


def test_criterion_6_golay_chain(capsys):
    c = Criterion(6, capsys)
    A = fixtures.load_code_array("code_golay_11_5_6_q3.txt")
    c.check("OA(243,11,3,4)", (A.r, A.N, A.d) == (243, 11, 3) and verify_strength(A, 4))
    c.check("MD 6", min_hamming_distance(A) == 6)
    B = drop_column(A, A.N - 1)
    c.check("dropped MD 5", min_hamming_distance(B) == 5)
    for x in range(1, 5):
        t0 = time.perf_counter()
        part = prefix_partition(B, x, 4)
        report = verify_theorem3(part.parent, part, 4)
        M = mixture_from_blocks(part.parent.entries, part.blocks, 3)
        c.check(f"x={x}: {10 - x} qutrits", part.parent.N == 10 - x)
        c.check(f"x={x}: theorem checks", report.passed and verify_partition(part))
        c.check(f"x={x}: purity 1/3^{x}", mixture_purity(M) == report.purity == Fraction(1, 3**x))
        c.check(f"x={x}: 4-uniform by the quantum oracle", is_k_uniform(M, 4))
        if x == 1:
            c.check("x=1 under 2 min", time.perf_counter() - t0 < 120)
    c.finish()


def test_criterion_7_example16(capsys):
    c = Criterion(7, capsys, limit=600)
    rep = example16_construction(fixtures.load_scheme("ds_example12.txt"))
    M_arr = rep.array
    c.check("OA(4^7,9,4,6)", (M_arr.r, M_arr.N, M_arr.d) == (4**7, 9, 4) and verify_strength(M_arr, 6))
    c.check("1024 blocks", rep.partition.m == 1024)
    c.check("every block MD >= 7", min(rep.block_distances) >= 7)
    M = mixture_from_blocks(M_arr.entries, rep.partition.blocks, 4)
    quarter = all(reduced_density(M, S).is_maximally_mixed() for S in itertools.combinations(range(9), 6))
    c.check("84 six-party reductions equal I/4096", comb(9, 6) == 84 and quarter)
    t0 = time.perf_counter()
    c.check("same verdict at 8 threads", find_nonuniform_subset(M, 6, threads=8) is None)
    c.check("8 threads under 2 min", time.perf_counter() - t0 < 120)
    c.check("purity 1/1024", mixture_purity(M) == Fraction(1, 1024))
    c.finish()


def test_criterion_8_feasibility(capsys):
    c = Criterion(8, capsys)
    rep = feasibility_bound(3**6, 7, 3, 5, 1)
    c.check("m >= 3^5 for OA(3^6,7,3,5), k'=1", rep.min_blocks == 3**5)
    facts = fixtures.load_existence()
    c.check("fixture records OA(81,8,3,4) as nonexistent", facts.get(OARequirement(81, 8, 3, 4)) is False)
    rep = feasibility_bound(3**5, 8, 3, 4, existence=facts)
    c.check("m=3 infeasible for OA(3^5,8,3,4)", 3 in rep.infeasible_m and not rep.allows(3))
    c.finish()


def test_criterion_9_search(capsys):
    c = Criterion(9, capsys)
    found = search_difference_scheme(4, 4, 2, 3, budget_seconds=1)
    c.check("D_3(4,4,2) found within 1 s", found.found and found.seconds < 1)
    if found.found:
        c.check("searched scheme verifies", verify_difference_scheme(found.result, 3))
        part = scheme_to_mixed_state_blocks(found.result)
        c.check("searched scheme gives a valid partition", verify_theorem3(part.parent, part, 3).passed)
    five = reproduce.route_example12_shift()
    A = OrthogonalArray(five.parent.entries, 4, 3)
    c.check("OA(64,5,4,3)", A.r == 64 and verify_strength(A, 3))
    res = partition_search(A, 4, 3, budget_seconds=60)
    c.check("partition found within 60 s", res.found and res.seconds < 60)
    if res.found:
        c.check("recovers the shift partition", sorted(res.result.blocks) == sorted(five.blocks))
        c.check("searched partition verifies", verify_theorem3(A, res.result, 3).passed)
    c.finish()


def _naive_strength(rows, d, t):
    for cols in itertools.combinations(range(rows.shape[1]), t):
        counts = Counter(map(tuple, rows[:, cols].tolist()))
        if len(counts) != d**t or len(set(counts.values())) != 1:
            return False
    return True


def _fixture_partitions():
    """Every partition the fixture corpus defines, as (label, rows, blocks, k, d)."""
    out = []
    A1, A2 = fixtures.load_oa("oa_example9_A1.txt"), fixtures.load_oa("oa_example9_A2.txt")
    out.append(("Ex.9", np.vstack([A1.entries, A2.entries]), [range(8), range(8, 16)], 3, 2))
    A8 = fixtures.load_oa("oa_example8.txt")
    out.append(("Ex.8", A8.entries, [(i,) for i in range(16)], 4, 2))
    for name in ("ds_example12.txt", "ds_d3_18_5_3.txt"):
        D = fixtures.load_scheme(name)
        P = scheme_to_mixed_state_blocks(D)
        out.append((name, P.parent.entries, P.blocks, D.k, D.d))
    for name, drop, k in (("code_golay_11_5_6_q3.txt", True, 4), ("code_golay_12_6_6_q3.txt", False, 5),
                          ("code_qr_11_5_6_q4.txt", True, 4)):
        A = fixtures.load_code_array(name)
        if drop:
            A = drop_column(A, A.N - 1)
        P = prefix_partition(A, k - 1 if A.d == 3 else k, k)
        out.append((name, P.parent.entries, P.blocks, k, A.d))
    return out


def test_criterion_10_properties(capsys):
    c = Criterion(10, capsys)
    # (i) combinatorial verdicts agree with the quantum oracle
    for label, rows, blocks, k, d in _fixture_partitions():
        report = verify_theorem3(rows, blocks, k, d)
        if report.passed:
            M = mixture_from_blocks(rows, blocks, d)
            c.check(f"(i) {label} purity 1/m", mixture_purity(M) == Fraction(1, len(blocks)))
            c.check(f"(i) {label} {k}-uniform", is_k_uniform(M, k))
    # (ii) strength against a naive oracle on 200 random arrays
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(200):
        d, n = int(rng.integers(2, 4)), int(rng.integers(2, 6))
        pool = np.array(list(itertools.product(range(d), repeat=n)))
        rows = pool[rng.choice(len(pool), size=int(rng.integers(1, len(pool) + 1)), replace=False)]
        agree += all(verify_strength(rows, t, d) == _naive_strength(rows, d, t) for t in range(1, n + 1))
    c.check("(ii) 200 random arrays", agree == 200)
    # (iii) Pauli phase table against 2x2 matrices, all 16 pairs
    ok = all(np.allclose(complex_pauli(a) @ complex_pauli(b), 1j ** pauli_product(a, b)[0] * complex_pauli(pauli_product(a, b)[1]))
             for a, b in itertools.product(range(4), repeat=2))
    c.check("(iii) Pauli table", ok)
    # (iv) every fixture parses, writes and parses back to the same object
    readers = {"gen": (formats.read_gen, formats.write_gen), "oa": (formats.read_oa, formats.write_oa),
               "ds": (formats.read_ds, formats.write_ds), "code": (formats.read_code, formats.write_code)}
    for name in fixtures.list_fixtures():
        path = fixtures.fixture_path(name)
        kind = formats.header_keyword(path)
        if kind == "oa-exists":
            c.check(f"(iv) {name}", len(fixtures.load_existence(name)) > 0)
            continue
        read, write = readers[kind]
        obj = read(path.read_text())
        c.check(f"(iv) {name}", read(write(obj)) == obj)
    # tables: the command exits 0 and every non-skipped row matches
    for table in ("1", "2"):
        code = cli_main(["reproduce", "--table", table, "--format", "tsv"])
        lines = capsys.readouterr().out.splitlines()[1:]
        statuses = [line.split("\t")[8] for line in lines]
        c.check(f"table {table} exits 0", code == 0)
        c.check(f"table {table} rows MATCH", all(s in (reproduce.MATCH, reproduce.SKIPPED) for s in statuses)
                and statuses.count(reproduce.MATCH) > 0)
    c.finish()
