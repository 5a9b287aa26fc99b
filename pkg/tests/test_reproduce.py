from fractions import Fraction

import pytest

from kuniform import reproduce
from kuniform.reproduce import MATCH, MISMATCH, NOTED, SKIPPED


@pytest.fixture(scope="module")
def table1():
    return reproduce.run("1")


@pytest.fixture(scope="module")
def qubit():
    return reproduce.run("qubit")


def test_table1_is_deterministic_across_threads(table1):
    threaded = reproduce.run("1", threads=4)
    assert [r.fields() for r in threaded] == [r.fields() for r in table1]


def test_table1_rows(table1):
    assert reproduce.all_ok(table1)
    statuses = {r.status for r in table1}
    assert statuses <= {MATCH, SKIPPED}
    by_cell = {(r.k, r.N): r for r in table1}
    assert by_cell[(3, 5)].purity == Fraction(1, 18)
    assert by_cell[(4, 6)].purity == Fraction(1, 81)
    assert by_cell[(5, 7)].purity == Fraction(1, 243)
    # every rebuilt cell at least reaches its target uniformity
    for r in table1:
        if r.status == MATCH:
            assert r.uniformity >= r.k and r.purity == r.expected


def test_h_annotations(table1):
    by_cell = {(r.k, r.N): r for r in table1}
    assert by_cell[(3, 5)].h_derived.startswith("not re-derived")
    assert by_cell[(6, 9)].h_derived.startswith("open")
    assert by_cell[(4, 5)].h_derived.startswith("attained")


def test_qubit_suite(qubit):
    assert reproduce.all_ok(qubit)
    assert sum(r.status == MATCH for r in qubit) == 9
    noted = [r for r in qubit if r.status == NOTED]
    assert len(noted) == 2
    ex8 = next(r for r in noted if r.route.startswith("Ex.8"))
    assert ex8.uniformity == 4 and "2-uniform" in ex8.note
    ex10 = next(r for r in noted if r.route.startswith("Ex.10"))
    assert "nonexistent" in ex10.note


def test_formatting(qubit):
    text = reproduce.format_text(qubit)
    assert text.splitlines()[0].startswith("table") and "summary:" in text
    tsv = reproduce.format_tsv(qubit).splitlines()
    assert tsv[0].split("\t") == reproduce.COLUMNS
    assert all(len(line.split("\t")) == len(reproduce.COLUMNS) for line in tsv)
    with pytest.raises(ValueError):
        reproduce.run("3")


def test_mismatch_is_reported():
    row = reproduce.evaluate("x", 4, 7, 2, Fraction(1, 2), "wrong k",
                             lambda: reproduce.Built(*reproduce.example9_array()))
    assert row.status == MISMATCH and "(i)" in row.note
