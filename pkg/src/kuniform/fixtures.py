"""Locate and load the bundled data files, re-verifying every one on load.

``KUNIFORM_FIXTURES`` points the loader at another directory with the same
file names.
"""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from . import formats
from .constructions import ConstructionError, DifferenceScheme, LinearCodeSpec, code_to_oa
from .oa_core import OARequirement, OrthogonalArray, bush_bound_excludes, verify_strength
from .stabilizer import GeneratorMatrix, check_all

ENV_VAR = "KUNIFORM_FIXTURES"


class FixtureError(RuntimeError):
    """A fixture is missing or fails its own claims."""


def fixture_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else Path(__file__).with_name("fixtures")


def fixture_path(name: str) -> Path:
    path = fixture_dir() / name
    if not path.is_file():
        raise FixtureError(f"fixture {name} not found in {fixture_dir()}")
    return path


def list_fixtures() -> list[str]:
    return sorted(p.name for p in fixture_dir().glob("*.txt"))


def _read(name: str, reader):
    try:
        return formats.read_file(fixture_path(name), reader)
    except (formats.FormatError, ValueError) as exc:
        raise FixtureError(f"{name}: {exc}") from exc


def load_generator(name: str) -> GeneratorMatrix:
    G = _read(name, formats.read_gen)
    if not check_all(G).valid:
        raise FixtureError(f"{name}: generator matrix fails the stabilizer checks")
    return G


def load_oa(name: str) -> OrthogonalArray:
    A = _read(name, formats.read_oa)
    if A.claimed_strength and not verify_strength(A, A.claimed_strength):
        raise FixtureError(f"{name}: claimed strength {A.claimed_strength} not verified")
    return A


def load_scheme(name: str) -> DifferenceScheme:
    try:
        return _read(name, formats.read_ds)
    except ConstructionError as exc:
        raise FixtureError(f"{name}: {exc}") from exc


def load_code(name: str) -> LinearCodeSpec:
    return _read(name, formats.read_code)


@lru_cache(maxsize=None)
def _code_array_cached(directory: str, name: str) -> OrthogonalArray:
    try:
        return code_to_oa(load_code(name))
    except ConstructionError as exc:
        raise FixtureError(f"{name}: {exc}") from exc


def load_code_array(name: str) -> OrthogonalArray:
    """Codeword array of a code fixture, with its claims measured (cached per directory)."""
    return _code_array_cached(str(fixture_dir()), name)


class ExistenceFacts(dict):
    """OA existence facts keyed by OARequirement.

    Recorded facts win.  For anything unrecorded, ``get`` answers False when
    the index-one Bush bound rules the array out and None otherwise.
    """

    def __init__(self, facts=(), sources=None):
        super().__init__(facts)
        self.sources = dict(sources or {})

    def get(self, req, default=None):
        if req in self:
            return self[req]
        if bush_bound_excludes(req.r, req.N, req.d, req.t):
            return False
        return default

    def source(self, req) -> str:
        if req in self.sources:
            return self.sources[req]
        return "Bush bound" if bush_bound_excludes(req.r, req.N, req.d, req.t) else "unknown"


def _read_existence(text: str) -> ExistenceFacts:
    facts, sources = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 7 or tokens[0] != "oa-exists" or tokens[5] not in ("yes", "no"):
            raise formats.FormatError(f"existence line {lineno}: expected 'oa-exists r N d t yes|no source'")
        try:
            req = OARequirement(*(int(x) for x in tokens[1:5]))
        except ValueError as exc:
            raise formats.FormatError(f"existence line {lineno}: non-integer parameter") from exc
        facts[req] = tokens[5] == "yes"
        sources[req] = " ".join(tokens[6:])
    return ExistenceFacts(facts, sources)


def load_existence(name: str = "existence_facts.txt") -> ExistenceFacts:
    facts = _read(name, _read_existence)
    for req, exists in facts.items():
        if exists and bush_bound_excludes(req.r, req.N, req.d, req.t):
            raise FixtureError(f"{name}: {req} recorded as existing but the Bush bound excludes it")
    return facts
