from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kuniform import fixtures, formats
from kuniform.constructions import DifferenceScheme, scheme_to_mixed_state_blocks
from kuniform.formats import FormatError
from kuniform.oa_core import DuplicateRowsError, OrthogonalArray, OrthogonalPartition
from kuniform.quantum_verify import MixedState, SparseState, mixture_from_blocks

READERS = {
    "gen": (formats.read_gen, formats.write_gen),
    "oa": (formats.read_oa, formats.write_oa),
    "ds": (formats.read_ds, formats.write_ds),
    "code": (formats.read_code, formats.write_code),
}


def _fixture_text(name):
    return fixtures.fixture_path(name).read_text()


@pytest.mark.parametrize("name", [n for n in fixtures.list_fixtures() if n != "existence_facts.txt"])
def test_fixture_round_trip(name):
    read, write = READERS[formats.header_keyword(fixtures.fixture_path(name))]
    obj = read(_fixture_text(name))
    again = read(write(obj))
    assert again == obj
    if hasattr(obj, "provenance"):
        assert again.provenance == obj.provenance


def test_existence_facts_parse():
    facts = fixtures.load_existence()
    lines = [ln for ln in _fixture_text("existence_facts.txt").splitlines() if ln.startswith("oa-exists")]
    assert len(facts) == len(lines) >= 1
    for req in facts:
        assert facts.source(req)


@pytest.mark.parametrize("name", ["gen_example2.txt", "oa_example8.txt", "ds_example12.txt", "code_golay_11_5_6_q3.txt"])
def test_truncated_fixture_is_rejected(name):
    lines = _fixture_text(name).rstrip("\n").splitlines()
    read, _ = READERS[formats.header_keyword(fixtures.fixture_path(name))]
    with pytest.raises(FormatError):
        read("\n".join(lines[:-1]))


@pytest.mark.parametrize(
    "reader,text",
    [
        (formats.read_gen, ""),
        (formats.read_gen, "# only a comment\n"),
        (formats.read_gen, "gen 1\n1 1\n"),
        (formats.read_gen, "gen 1 2\n1 x\n"),
        (formats.read_gen, "gen 1 2\n1 1 1\n"),
        (formats.read_oa, "oa 2 2 2 1\n0 0\n1 1\n0 1\n"),
        (formats.read_oa, "ds 2 2 2 1\n0 0\n1 1\n"),
        (formats.read_oa, "oa 2 2 3 1\n0 0\n0 3\n"),
        (formats.read_ds, "ds 2 2 2 2 ring\n0 0\n0 1\n"),
        (formats.read_code, "code 3 4 1\n1 1 1 1\n"),
        (formats.read_code, "code 3 4 1\n1 1 1 1\nclaims strength=1\n"),
        (formats.read_code, "code 3 4 1\n1 1 1 1\nclaims strength=1 md=four\n"),
        (formats.read_gen, "gen 1 2\n1 é\n"),
    ],
)
def test_malformed_inputs(reader, text):
    with pytest.raises(FormatError):
        reader(text)


def test_raw_readers_keep_unverified_data():
    raw = formats.read_oa_raw("oa 2 2 2 1\n0 0\n0 0\n")
    assert raw.rows.tolist() == [[0, 0], [0, 0]] and raw.k == 1
    # repeated runs parse but are refused as an array
    with pytest.raises(DuplicateRowsError):
        formats.read_oa("oa 2 2 2 1\n0 0\n0 0\n")


def test_cyclic_scheme_header_round_trip():
    D = DifferenceScheme(np.array([[0, 0], [0, 1], [0, 2], [0, 3]]), 4, 2, "manual", "cyclic")
    text = formats.write_ds(D)
    assert text.splitlines()[1] == "ds 4 2 4 2 cyclic"
    assert formats.read_ds(text) == D


def test_partition_round_trip():
    part = scheme_to_mixed_state_blocks(fixtures.load_scheme("ds_d3_18_5_3.txt"))
    text = formats.write_partition(part)
    assert formats.read_partition(text, part.parent) == part
    with pytest.raises(FormatError):
        formats.read_partition(text.replace("block 1\n", "block 7\n"), part.parent)
    with pytest.raises(FormatError):
        formats.read_partition(text.replace("partition 18", "partition 19"), part.parent)
    bad_index = text.replace("\n0 1 2\n", "\n0 1 99\n")
    with pytest.raises(FormatError):
        formats.read_partition(bad_index, part.parent)


@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_state_round_trip_of_flat_blocks(d, N, data):
    pool = [tuple(int(c) for c in np.base_repr(i, d).zfill(N)) for i in range(d**N)]
    basis = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=4, unique=True))
    # +-1 and +-i amplitudes keep every factor rational after 1/sqrt(s)
    amps = data.draw(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1)]), min_size=len(basis), max_size=len(basis)))
    M = MixedState((SparseState(d, N, dict(zip(basis, amps))),))
    assert formats.read_state(formats.write_state(M)) == M


def test_state_export_of_oa_mixture():
    A1 = fixtures.load_oa("oa_example9_A1.txt")
    M = mixture_from_blocks(A1.entries, [range(4), range(4, 8)], 2)
    text = formats.write_state(M)
    assert "component 1 4" in text and "0000000 1/1 0/1" in text
    assert formats.read_state(text) == M


def test_state_export_rejects_irrational_factors():
    s = SparseState(2, 1, {(0,): (1, 0), (1,): (2, 0)})
    with pytest.raises(FormatError):
        formats.write_state(s)


@pytest.mark.parametrize(
    "text",
    [
        "state 2 1 1\ncomponent 0 2\n0 1/1 0/1\n",
        "state 2 1 1\ncomponent 0 1\n0 1/2 0/1\n",
        "state 2 1 1\ncomponent 0 1\n2 1/1 0/1\n",
        "state 2 1 1\ncomponent 0 1\n00 1/1 0/1\n",
        "state 2 1 1\ncomponent 0 1\n0 1 0\n",
        "state 2 1 1\ncomponent 0 1\n0 1/0 0/1\n",
        "state 2 1 1\ncomponent 1 1\n0 1/1 0/1\n",
        "state 2 1 1\ncomponent 0 2\n0 1/1 0/1\n0 1/1 0/1\n",
        "state 2 1 1\ncomponent 0 1\n0 1/1 0/1\n1 0/1 0/1\n",
    ],
)
def test_malformed_states(text):
    with pytest.raises(FormatError):
        formats.read_state(text)


def test_state_amplitudes_keep_exact_values():
    text = "state 2 1 1\ncomponent 0 2\n0 1/1 0/1\n1 0/1 -1/1\n"
    (comp,) = formats.read_state(text).components
    assert comp.terms == {(0,): (1, 0), (1,): (0, -1)}
    assert comp.overlap2(comp) == Fraction(1)


def test_read_file_errors(tmp_path):
    with pytest.raises(FormatError):
        formats.read_file(tmp_path / "missing.txt", formats.read_gen)
    p = tmp_path / "bin.txt"
    p.write_bytes(b"\xff\xfe")
    with pytest.raises(FormatError):
        formats.read_file(p, formats.read_gen)


def test_oa_writer_records_provenance():
    A = OrthogonalArray(np.array([[0, 0], [1, 1]]), 2, 1)
    text = formats.write_oa(A, provenance="manual")
    assert text.startswith("# provenance: manual\n")
    assert formats.read_oa(text) == A
    assert isinstance(formats.read_partition("partition 1 1\nblock 0\n0 1\n", A), OrthogonalPartition)
