"""Plain-text formats for generators, arrays, schemes, codes, partitions and states.

Every file is ASCII.  Lines starting with ``#`` are comments, except that a
``# provenance: <tag>`` line is read as metadata.  Writers produce exactly what
the readers accept, so write(read(write(x))) == write(x) byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .constructions import DifferenceScheme, LinearCodeSpec
from .oa_core import OrthogonalArray, OrthogonalPartition
from .quantum_verify import MixedState, SparseState
from .stabilizer import GeneratorMatrix

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class FormatError(ValueError):
    """Input text does not follow the expected layout."""


@dataclass
class _Lines:
    body: list[list[str]]
    provenance: str | None


def _split(text: str) -> _Lines:
    if not text.isascii():
        raise FormatError("file is not ASCII")
    body, provenance = [], None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line[1:].strip()
            if tag.startswith("provenance:"):
                provenance = tag.split(":", 1)[1].strip()
            continue
        body.append(line.split())
    if not body:
        raise FormatError("file has no content")
    return _Lines(body, provenance)


def _ints(tokens: list[str], what: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"non-integer in {what}: {' '.join(tokens)}") from exc


def _header(lines: _Lines, keyword: str, count: int) -> list[int]:
    head = lines.body[0]
    if head[0] != keyword or len(head) != count + 1:
        raise FormatError(f"expected header '{keyword}' with {count} fields, got {' '.join(head)}")
    return _ints(head[1:], "header")


def _matrix(rows: list[list[str]], n_rows: int, n_cols: int, what: str) -> np.ndarray:
    if len(rows) < n_rows:
        raise FormatError(f"{what}: expected {n_rows} rows, found {len(rows)}")
    out = []
    for row in rows[:n_rows]:
        vals = _ints(row, what)
        if len(vals) != n_cols:
            raise FormatError(f"{what}: row has {len(vals)} entries, expected {n_cols}")
        out.append(vals)
    return np.array(out, dtype=np.int64).reshape(n_rows, n_cols)


def _no_trailing(rows: list[list[str]], used: int, what: str) -> None:
    if len(rows) > used:
        raise FormatError(f"{what}: unexpected extra line '{' '.join(rows[used])}'")


def _rows_text(rows: np.ndarray) -> list[str]:
    return [" ".join(str(int(x)) for x in row) for row in rows]


def _with_provenance(lines: list[str], provenance: str | None) -> str:
    head = [f"# provenance: {provenance}"] if provenance else []
    return "\n".join(head + lines) + "\n"


# ---------------------------------------------------------------------------
# generator matrices: "gen m N"


def read_gen(text: str) -> GeneratorMatrix:
    lines = _split(text)
    m, N = _header(lines, "gen", 2)
    rows = _matrix(lines.body[1:], m, N, "gen")
    _no_trailing(lines.body[1:], m, "gen")
    try:
        return GeneratorMatrix(rows, n_qubits=N)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_gen(G: GeneratorMatrix) -> str:
    return _with_provenance([f"gen {G.m} {G.N}"] + _rows_text(G.entries), None)


# ---------------------------------------------------------------------------
# orthogonal arrays: "oa r N d k" (k = claimed strength, 0 if none)


@dataclass
class RawArray:
    """Parsed rows before any validity check; duplicate rows are allowed here."""

    rows: np.ndarray
    d: int
    k: int
    provenance: str | None = None

    def array(self) -> OrthogonalArray:
        return OrthogonalArray(self.rows, self.d, self.k or None)


def read_oa_raw(text: str) -> RawArray:
    lines = _split(text)
    r, N, d, k = _header(lines, "oa", 4)
    rows = _matrix(lines.body[1:], r, N, "oa")
    _no_trailing(lines.body[1:], r, "oa")
    if rows.size and (rows.min() < 0 or rows.max() >= d):
        raise FormatError(f"oa: symbols must lie in 0..{d - 1}")
    return RawArray(rows, d, k, lines.provenance)


def read_oa(text: str) -> OrthogonalArray:
    return read_oa_raw(text).array()


def write_oa(A: OrthogonalArray, provenance: str | None = None) -> str:
    head = f"oa {A.r} {A.N} {A.d} {A.claimed_strength or 0}"
    return _with_provenance([head] + _rows_text(A.entries), provenance)


# ---------------------------------------------------------------------------
# difference schemes: "ds r N d k [cyclic]"


@dataclass
class RawScheme:
    rows: np.ndarray
    d: int
    k: int
    group: str
    provenance: str | None = None

    def scheme(self) -> DifferenceScheme:
        return DifferenceScheme(self.rows, self.d, self.k, self.provenance or "file", self.group)


def read_ds_raw(text: str) -> RawScheme:
    lines = _split(text)
    head = lines.body[0]
    group = "field"
    if len(head) == 6 and head[5] == "cyclic":
        group = "cyclic"
        lines.body[0] = head[:5]
    r, N, d, k = _header(lines, "ds", 4)
    rows = _matrix(lines.body[1:], r, N, "ds")
    _no_trailing(lines.body[1:], r, "ds")
    if rows.min() < 0 or rows.max() >= d:
        raise FormatError(f"ds: symbols must lie in 0..{d - 1}")
    return RawScheme(rows, d, k, group, lines.provenance)


def read_ds(text: str) -> DifferenceScheme:
    return read_ds_raw(text).scheme()


def write_ds(D: DifferenceScheme) -> str:
    head = f"ds {D.r} {D.N} {D.d} {D.k}" + (" cyclic" if D.group == "cyclic" else "")
    return _with_provenance([head] + _rows_text(D.entries), D.provenance)


# ---------------------------------------------------------------------------
# linear codes: "code q n kappa", rows, "claims strength=t md=x"


def read_code(text: str) -> LinearCodeSpec:
    lines = _split(text)
    q, n, kappa = _header(lines, "code", 3)
    gen = _matrix(lines.body[1:], kappa, n, "code")
    rest = lines.body[1 + kappa :]
    if len(rest) != 1 or rest[0][0] != "claims":
        raise FormatError("code: expected a single 'claims strength=<t> md=<x>' line after the generator")
    claims = {}
    for token in rest[0][1:]:
        key, _, value = token.partition("=")
        if key not in ("strength", "md") or not value.isdigit():
            raise FormatError(f"code: bad claim '{token}'")
        claims[key] = int(value)
    if set(claims) != {"strength", "md"}:
        raise FormatError("code: both strength and md claims are required")
    try:
        return LinearCodeSpec(q, n, kappa, gen, lines.provenance or "file", claims["strength"], claims["md"])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_code(spec: LinearCodeSpec) -> str:
    lines = [f"code {spec.q} {spec.n} {spec.kappa}"] + _rows_text(spec.generator)
    lines.append(f"claims strength={spec.claimed_strength} md={spec.claimed_md}")
    return _with_provenance(lines, spec.provenance)


# ---------------------------------------------------------------------------
# partitions: "partition m k1", then "block i" followed by one line of row indices


def read_partition(text: str, parent: OrthogonalArray) -> OrthogonalPartition:
    lines = _split(text)
    m, k1 = _header(lines, "partition", 2)
    body = lines.body[1:]
    if len(body) != 2 * m:
        raise FormatError(f"partition: expected {m} block stanzas")
    blocks = []
    for i in range(m):
        tag, idx = body[2 * i], body[2 * i + 1]
        if tag != ["block", str(i)]:
            raise FormatError(f"partition: expected 'block {i}', got {' '.join(tag)}")
        blocks.append(tuple(_ints(idx, "partition block")))
    try:
        return OrthogonalPartition(parent, blocks, k1)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_partition(P: OrthogonalPartition) -> str:
    lines = [f"partition {P.m} {P.block_strength}"]
    for i, block in enumerate(P.blocks):
        lines.append(f"block {i}")
        lines.append(" ".join(str(j) for j in block))
    return _with_provenance(lines, None)


# ---------------------------------------------------------------------------
# states: "state d N m", then per component "component i s" and s amplitude lines

_STATE_NOTE = "# amplitude of each listed basis string = (re + i*im) / sqrt(s)"


def _basis_text(basis: tuple[int, ...]) -> str:
    return "".join(_DIGITS[x] for x in basis)


def _basis_parse(token: str, d: int, N: int) -> tuple[int, ...]:
    if len(token) != N:
        raise FormatError(f"state: basis string '{token}' has length {len(token)}, expected {N}")
    try:
        vals = tuple(_DIGITS.index(ch) for ch in token)
    except ValueError as exc:
        raise FormatError(f"state: bad basis string '{token}'") from exc
    if max(vals) >= d:
        raise FormatError(f"state: basis string '{token}' uses a symbol >= {d}")
    return vals


def _fraction(token: str) -> Fraction:
    num, sep, den = token.partition("/")
    if not sep:
        raise FormatError(f"state: amplitude part '{token}' is not of the form p/q")
    try:
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"state: bad amplitude part '{token}'") from exc


def _rational_sqrt(x: Fraction) -> Fraction | None:
    p, q = math.isqrt(x.numerator), math.isqrt(x.denominator)
    return Fraction(p, q) if p * p == x.numerator and q * q == x.denominator else None


def write_state(M) -> str:
    """Export a state or mixture; each amplitude must be a rational multiple of 1/sqrt(s)."""
    if isinstance(M, SparseState):
        M = MixedState((M,))
    lines = [_STATE_NOTE, f"state {M.d} {M.N} {M.m}"]
    for i, comp in enumerate(M.components):
        s = len(comp)
        factor = _rational_sqrt(Fraction(s, comp.norm2))
        if factor is None:
            raise FormatError(f"component {i} has amplitudes that are not rational multiples of 1/sqrt({s})")
        lines.append(f"component {i} {s}")
        for basis, (re, im) in comp.terms.items():
            a, b = re * factor, im * factor
            lines.append(f"{_basis_text(basis)} {a.numerator}/{a.denominator} {b.numerator}/{b.denominator}")
    return "\n".join(lines) + "\n"


def read_state(text: str) -> MixedState:
    lines = _split(text)
    d, N, m = _header(lines, "state", 3)
    body = lines.body[1:]
    pos = 0
    comps = []
    for i in range(m):
        if pos >= len(body) or body[pos][0] != "component" or len(body[pos]) != 3:
            raise FormatError(f"state: expected 'component {i} <s>'")
        idx, s = _ints(body[pos][1:], "component header")
        if idx != i or s < 1:
            raise FormatError(f"state: bad component header {' '.join(body[pos])}")
        pos += 1
        amps: dict[tuple[int, ...], tuple[Fraction, Fraction]] = {}
        for _ in range(s):
            if pos >= len(body) or len(body[pos]) != 3:
                raise FormatError(f"state: component {i} is truncated")
            basis = _basis_parse(body[pos][0], d, N)
            if basis in amps:
                raise FormatError(f"state: basis string {body[pos][0]} repeated")
            amps[basis] = (_fraction(body[pos][1]), _fraction(body[pos][2]))
            pos += 1
        if sum(a * a + b * b for a, b in amps.values()) != s:
            raise FormatError(f"state: component {i} is not normalised")
        scale = math.lcm(*(x.denominator for pair in amps.values() for x in pair))
        terms = {b: (int(a * scale), int(c * scale)) for b, (a, c) in amps.items()}
        try:
            comps.append(SparseState(d, N, terms))
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
    _no_trailing(body, pos, "state")
    return MixedState(tuple(comps))


def read_file(path, reader):
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return reader(text)


def header_keyword(path) -> str:
    """First keyword of the file's first non-comment line."""
    return read_file(path, lambda text: _split(text).body[0][0])
