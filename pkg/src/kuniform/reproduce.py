"""End-to-end reproduction of the purity tables and the qubit examples.

Each cell is rebuilt from its construction route, checked combinatorially
(strength, block distances) and then quantum mechanically (every k-party
reduction, Gram-matrix purity).  Pure-state cells that rest on constructions
not shipped here are reported as SKIPPED-FIXTURE rather than assumed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import symbol_addition
from .constructions import (
    ConstructionError,
    DifferenceScheme,
    drop_column,
    example16_construction,
    generic_scheme_odd_prime_power,
    prefix_partition,
    scheme_to_mixed_state_blocks,
    search_difference_scheme,
    single_parity_scheme,
)
from .fixtures import (
    ExistenceFacts,
    FixtureError,
    load_code_array,
    load_existence,
    load_generator,
    load_oa,
    load_scheme,
)
from .oa_core import OrthogonalArray, construct_strength1, feasibility_bound, verify_theorem3
from .quantum_verify import (
    MixedState,
    NonOrthogonalWarning,
    lower_purity,
    max_uniformity,
    mixture_from_blocks,
    mixture_purity,
)
from .stabilizer import check_all, purity, synthesize_density

MATCH, MISMATCH, NOTED, SKIPPED = "MATCH", "MISMATCH", "DISCREPANCY-NOTED", "SKIPPED-FIXTURE"


@dataclass
class ReproductionRow:
    table: str
    k: int
    N: int
    d: int
    expected: Fraction | None
    route: str
    purity: Fraction | None = None
    uniformity: int | None = None
    status: str = SKIPPED
    h_paper: str = ""
    h_derived: str = ""
    note: str = ""

    def fields(self) -> list[str]:
        def frac(x):
            return "-" if x is None else f"{x.numerator}/{x.denominator}"

        return [
            self.table,
            str(self.k),
            str(self.N),
            str(self.d),
            frac(self.expected),
            self.route,
            frac(self.purity),
            "-" if self.uniformity is None else str(self.uniformity),
            self.status,
            self.h_paper or "-",
            self.h_derived or "-",
            self.note or "-",
        ]


COLUMNS = ["table", "k", "N", "d", "expected", "route", "purity", "max_k", "status", "H", "H_derived", "note"]


@dataclass
class Built:
    """A verified array with its blocks, ready for the quantum check."""

    parent: OrthogonalArray
    blocks: list


def _from_partition(P) -> Built:
    return Built(P.parent, list(P.blocks))


# ---------------------------------------------------------------------------
# construction routes


def route_strength1(N: int, d: int) -> Built:
    A = construct_strength1(N, d)
    return Built(A, [tuple(range(A.r))])


def route_single_parity(N: int, d: int, k: int) -> Built:
    return _from_partition(scheme_to_mixed_state_blocks(single_parity_scheme(N, d, k)))


def route_scheme(scheme) -> Built:
    return _from_partition(scheme_to_mixed_state_blocks(scheme))


def route_code_prefix(code: str, x: int, k: int, drop: bool) -> Built:
    A = load_code_array(code)
    if drop:
        A = drop_column(A, A.N - 1)
    return _from_partition(prefix_partition(A, x, k))


def route_example12_columns(cols: int) -> Built:
    """D_3(16, cols, 4) from the first ``cols`` columns of the printed scheme (cols >= 3)."""
    D = load_scheme("ds_example12.txt")
    sub = DifferenceScheme(D.entries[:, 1 : 1 + cols], 4, 3, D.provenance, D.group)
    return route_scheme(sub)


def route_example12_shift() -> Built:
    """5-ququart: bands l (+) A of the array A = scheme without its zero column."""
    D = load_scheme("ds_example12.txt")
    base = D.entries[:, 1:]
    add = symbol_addition(4, D.group)
    B = OrthogonalArray(np.concatenate([add[l, base] for l in range(4)]), 4, 3)
    return Built(B, [tuple(range(16 * l, 16 * (l + 1))) for l in range(4)])


def route_example16() -> Built:
    rep = example16_construction(load_scheme("ds_example12.txt"))
    return Built(rep.array, list(rep.partition.blocks))


# ---------------------------------------------------------------------------
# evaluation


def _h_annotation(built: Built, N: int, d: int, k: int, h_paper: str, facts: ExistenceFacts) -> str:
    if h_paper == "e":
        return "open: minimal run size unknown"
    if h_paper == "d":
        return "not re-derived: needs the OA(54,5,3,3) classification"
    report = feasibility_bound(built.parent.r, N, d, k, existence=facts)
    m = len(built.blocks)
    if report.min_blocks is None:
        return "no feasible m"
    if report.min_blocks == m:
        return f"attained: m>={report.min_blocks} for r={built.parent.r}"
    return f"not attained: bound m>={report.min_blocks}, built m={m}"


def evaluate(
    table: str,
    k: int,
    N: int,
    d: int,
    expected: Fraction,
    route: str,
    build: Callable[[], Built],
    h_paper: str = "",
    facts: ExistenceFacts | None = None,
    threads: int = 1,
) -> ReproductionRow:
    row = ReproductionRow(table, k, N, d, expected, route, h_paper=h_paper)
    try:
        built = build()
    except (FixtureError, ConstructionError) as exc:
        row.status, row.note = MISMATCH, f"construction failed: {exc}"
        return row
    report = verify_theorem3(built.parent, built.blocks, k)
    M = mixture_from_blocks(built.parent.entries, built.blocks, d)
    row.purity = mixture_purity(M)
    row.uniformity = max_uniformity(M, threads, start=k)
    if facts is not None:
        row.h_derived = _h_annotation(built, N, d, k, h_paper, facts)
    ok = report.passed and row.purity == expected and row.purity == report.purity and row.uniformity >= k
    row.status = MATCH if ok else MISMATCH
    if not report.passed:
        row.note = "; ".join(report.failures)
    return row


def _skipped(table, k, N, d, ref) -> ReproductionRow:
    return ReproductionRow(
        table, k, N, d, Fraction(1), ref, status=SKIPPED,
        note=f"pure state from external construction ({ref}); not shipped",
    )


def _cells(d: int) -> list[tuple]:
    """(k, N, expected purity, route label, builder, H letter) for one table."""
    cells: list[tuple] = []
    for N in range(4, 10):
        cells.append((1, N, Fraction(1), "Th.2 strength-1", lambda N=N: route_strength1(N, d), ""))
    for N in range(4, 10):
        cells.append((2, N, None, "ref:npj", None, ""))

    def sp(k, N, h):
        return (k, N, Fraction(1, d ** (N - 2)), f"Col.1 single-parity D_{N - 1}({d}^{N - 2},{N},{d})",
                lambda: route_single_parity(N, d, k), h)

    if d == 3:
        cells.append((3, 4, Fraction(1, 9), "Col.1 quadratic D_3(9,4,3)",
                      lambda: route_scheme(generic_scheme_odd_prime_power(3)), "b"))
        cells.append((3, 5, Fraction(1, 18), "Ex.11 D_3(18,5,3) fixture",
                      lambda: route_scheme(load_scheme("ds_d3_18_5_3.txt")), "d"))
        code11, code12, h4, h5 = "code_golay_11_5_6_q3.txt", "code_golay_12_6_6_q3.txt", "caa", "caa"
    else:
        cells.append((3, 4, Fraction(1, 16), "Col.1 D_3(16,4,4) from Ex.12",
                      lambda: route_example12_columns(4), "b"))
        cells.append((3, 5, Fraction(1, 4), "Ex.12 shift partition",
                      route_example12_shift, "b"))
        code11, code12, h4, h5 = "code_qr_11_5_6_q4.txt", "code_qr_12_6_6_q4.txt", "eee", "eee"
    for N in range(6, 10):
        cells.append((3, N, None, "ref:npj", None, ""))
    cells.append(sp(4, 5, "b"))
    for (N, x), h in zip(((6, 4), (7, 3), (8, 2)), h4):
        cells.append((4, N, Fraction(1, d**x), f"prefix x={x} of {code11} minus a column",
                      lambda x=x: route_code_prefix(code11, x, 4, True), h))
    cells.append((4, 9, None, "ref:huber18", None, ""))
    cells.append(sp(5, 6, "b"))
    for (N, x), h in zip(((7, 5), (8, 4), (9, 3)), h5):
        cells.append((5, N, Fraction(1, d**x), f"prefix x={x} of {code12}",
                      lambda x=x: route_code_prefix(code12, x, 5, False), h))
    cells.append(sp(6, 7, "b"))
    cells.append(sp(6, 8, "c" if d == 3 else "e"))
    if d == 3:
        cells.append(sp(6, 9, "e"))
    else:
        cells.append((6, 9, Fraction(1, 4**5), "Ex.16 product construction", route_example16, "e"))
    cells.append(sp(7, 8, "b"))
    cells.append(sp(7, 9, "c" if d == 3 else "e"))
    cells.append(sp(8, 9, "b"))
    return cells


def reproduce_table(d: int, threads: int = 1) -> list[ReproductionRow]:
    table = {3: "I", 4: "II"}[d]
    facts = load_existence()
    rows = []
    for k, N, expected, route, build, h in _cells(d):
        if build is None:
            rows.append(_skipped(table, k, N, d, route))
            continue
        rows.append(evaluate(table, k, N, d, expected, route, build, h, facts, threads))
    rows.sort(key=lambda r: (r.k, r.N))
    return rows


# ---------------------------------------------------------------------------
# qubit examples


_GEN_EXAMPLES = {2: (4, 7), 3: (4, 8), 4: (4, 9), 5: (5, 8), 6: (5, 9), 7: (6, 9)}


def _stabilizer_row(ex: int, threads: int) -> ReproductionRow:
    k, N = _GEN_EXAMPLES[ex]
    G = load_generator(f"gen_example{ex}.txt")
    expected = Fraction(1, 2 ** (G.N - G.m))
    row = ReproductionRow("qubit", k, N, 2, expected, f"Ex.{ex} generator matrix")
    checks = check_all(G)
    rho = synthesize_density(G)
    row.purity = purity(rho)
    row.uniformity = max_uniformity(rho, threads, d=2, start=k)
    ok = checks.valid and checks.max_k == k and row.purity == expected and row.uniformity == k
    row.status = MATCH if ok else MISMATCH
    row.note = f"generator max_k={checks.max_k}"
    return row


def example9_mixture() -> MixedState:
    A1, A2 = load_oa("oa_example9_A1.txt"), load_oa("oa_example9_A2.txt")
    rows = np.concatenate([A1.entries, A2.entries])
    return mixture_from_blocks(rows, [tuple(range(8)), tuple(range(8, 16))], 2)


def example9_array():
    A1, A2 = load_oa("oa_example9_A1.txt"), load_oa("oa_example9_A2.txt")
    return OrthogonalArray(np.concatenate([A1.entries, A2.entries]), 2, 3), [tuple(range(8)), tuple(range(8, 16))]


def reproduce_qubit(threads: int = 1) -> list[ReproductionRow]:
    rows = [_stabilizer_row(ex, threads) for ex in sorted(_GEN_EXAMPLES)]

    A8 = load_oa("oa_example8.txt")
    r8 = evaluate("qubit", 4, 5, 2, Fraction(1, 16), "Ex.8 singletons of OA(16,5,2,4)",
                  lambda: Built(A8, [(i,) for i in range(A8.r)]), threads=threads)
    if r8.status == MATCH:
        r8.status = NOTED
        r8.note = f"example text calls the state 2-uniform; header and strength give k=4; measured max_k={r8.uniformity}"
    rows.append(r8)

    A9, blocks9 = example9_array()
    rows.append(evaluate("qubit", 3, 7, 2, Fraction(1, 2), "Ex.9 blocks A1, A2",
                         lambda: Built(A9, blocks9), threads=threads))

    low = ReproductionRow("qubit", 3, 7, 2, Fraction(1, 4), "Ex.9 lowered by sigma_x on qubit 7")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonOrthogonalWarning)
        M = lower_purity(example9_mixture(), 6, 1)
    low.purity = mixture_purity(M)
    low.uniformity = max_uniformity(M, threads, start=3)
    low.status = MATCH if low.purity == Fraction(1, 4) and low.uniformity >= 3 and not caught else MISMATCH
    rows.append(low)

    found = search_difference_scheme(4, 4, 2, 3, budget_seconds=5)
    if found.found:
        rows.append(evaluate("qubit", 3, 4, 2, Fraction(1, 4), "Ex.10 searched D_3(4,4,2)",
                             lambda: route_scheme(found.result), threads=threads))
    else:
        rows.append(ReproductionRow("qubit", 3, 4, 2, Fraction(1, 4), "Ex.10 searched D_3(4,4,2)",
                                    status=MISMATCH, note=f"search {found.status}"))

    odd = search_difference_scheme(8, 5, 2, 4, budget_seconds=5)
    full = search_difference_scheme(16, 5, 2, 4, budget_seconds=5)
    if full.found:
        r10 = evaluate("qubit", 4, 5, 2, Fraction(1, 16), "Ex.10 D_4(16,5,2)",
                       lambda: route_scheme(full.result), threads=threads)
    else:
        r10 = ReproductionRow("qubit", 4, 5, 2, Fraction(1, 16), "Ex.10 D_4(16,5,2)", status=MISMATCH,
                              note=f"search {full.status}")
    if r10.status == MATCH:
        r10.status = NOTED
    r10.note = (
        f"cited corollary needs odd k; D_4(8,5,2) search: {odd.status}; "
        "purity 1/16 reached through D_4(16,5,2), the same array as Ex.8"
    )
    rows.append(r10)
    return rows


# ---------------------------------------------------------------------------
# reporting


def run(which: str, threads: int = 1) -> list[ReproductionRow]:
    if which == "1":
        return reproduce_table(3, threads)
    if which == "2":
        return reproduce_table(4, threads)
    if which == "qubit":
        return reproduce_qubit(threads)
    raise ValueError(f"unknown table {which!r}")


def format_text(rows: list[ReproductionRow]) -> str:
    cells = [COLUMNS] + [r.fields() for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(COLUMNS) - 1)]
    out = []
    for c in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(c, widths)) + "  " + c[-1])
    counts = {}
    for r in rows:
        counts[r.status] = counts.get(r.status, 0) + 1
    out.append("summary: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return "\n".join(out) + "\n"


def format_tsv(rows: list[ReproductionRow]) -> str:
    return "\n".join("\t".join(c) for c in [COLUMNS] + [r.fields() for r in rows]) + "\n"


def all_ok(rows: list[ReproductionRow]) -> bool:
    return all(r.status != MISMATCH for r in rows)
