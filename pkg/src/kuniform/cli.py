"""``kuniform`` command line.

Exit codes: 0 success, 1 a verification failed, 2 parse or I/O error,
3 a search ran out of budget.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import formats, reproduce
from .constructions import (
    BUDGET,
    ConstructionError,
    code_to_oa,
    example16_construction,
    kronecker_sum_expand,
    partition_search,
    scheme_to_mixed_state_blocks,
    search_difference_scheme,
    verify_difference_scheme,
)
from .fixtures import FixtureError
from .oa_core import (
    INF,
    DuplicateRowsError,
    OrthogonalArray,
    is_irredundant,
    max_strength,
    min_hamming_distance,
    verify_strength,
    verify_theorem3,
)
from .quantum_verify import MixedState, find_nonuniform_subset, max_uniformity, mixture_from_blocks, mixture_purity
from .stabilizer import (
    MAX_DENSE_QUBITS,
    check_commuting,
    check_independence,
    min_subset_weight,
    pure_decomposition,
    purity,
    synthesize_density,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3


class Report:
    """Ordered key/value lines, printed as ``key: value`` or tab-separated."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.items: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        self.items.append((key, _show(value)))

    def emit(self) -> None:
        sep = "\t" if self.fmt == "tsv" else ": "
        for key, value in self.items:
            print(f"{key}{sep}{value}")


def _show(value) -> str:
    if isinstance(value, bool):
        return "PASS" if value else "FAIL"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if value == INF:
        return "inf"
    return str(value)


# ---------------------------------------------------------------------------
# commands


def cmd_verify_gen(args) -> int:
    G = formats.read_file(args.file, formats.read_gen)
    out = Report(args.format)
    commuting = check_commuting(G)
    independent = check_independence(G)
    weight = min_subset_weight(G) if independent else None
    max_k = None if weight is None else min(weight, G.N) - 1
    k = args.k if args.k is not None else max_k
    uniform = weight is not None and k is not None and k >= 1 and weight >= k + 1
    out.add("qubits", G.N)
    out.add("generators", G.m)
    out.add("(a) commuting", commuting)
    out.add("(b) independent", independent)
    out.add(f"(c) uniformity k={k}", uniform)
    out.add("max_k", "-" if max_k is None else max_k)
    out.add("purity", Fraction(1, 2 ** (G.N - G.m)))
    ok = commuting and independent and uniform
    if args.quantum and ok:
        if G.N > MAX_DENSE_QUBITS:
            out.add("quantum", f"skipped: N > {MAX_DENSE_QUBITS}")
        else:
            rho = synthesize_density(G)
            p = purity(rho)
            projector = (rho @ rho) == rho.scaled(p)
            witness = find_nonuniform_subset(rho, k, args.threads, d=2)
            states = pure_decomposition(G)
            out.add("quantum purity", p)
            out.add("quantum rho^2 = purity * rho", projector)
            out.add(f"quantum {k}-party reductions", True if witness is None else f"FAIL at {witness}")
            out.add("pure decomposition states", len(states))
            ok = ok and projector and witness is None and p == Fraction(1, 2 ** (G.N - G.m))
    out.add("verdict", ok)
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_oa(args) -> int:
    out = Report(args.format)
    if formats.header_keyword(args.file) == "code":
        spec = formats.read_file(args.file, formats.read_code)
        out.add("code", f"[{spec.n},{spec.kappa}]_{spec.q} ({spec.provenance})")
        try:
            A = code_to_oa(spec)
        except ConstructionError as exc:
            out.add("code claims", f"FAIL ({exc})")
            out.add("verdict", False)
            out.emit()
            return EXIT_FAIL
        out.add(f"code claims strength={spec.claimed_strength} md={spec.claimed_md}", True)
        raw = formats.RawArray(A.entries, A.d, spec.claimed_strength)
    else:
        raw = formats.read_file(args.file, formats.read_oa_raw)
    try:
        A = raw.array()
    except DuplicateRowsError:
        out.add("rows distinct", False)
        out.add("verdict", False)
        out.emit()
        return EXIT_FAIL
    strength = max_strength(A)
    md = min_hamming_distance(A)
    out.add("array", f"OA({A.r},{A.N},{A.d},{strength})")
    out.add("measured strength", strength)
    out.add("measured MD", md)
    ok = True
    claims = []
    if raw.k:
        claims.append(("header strength", raw.k, verify_strength(A, raw.k)))
    if args.strength is not None:
        claims.append(("strength", args.strength, verify_strength(A, args.strength)))
    if args.md is not None:
        claims.append(("MD >=", args.md, md >= args.md))
    if args.irredundant is not None:
        irr = verify_strength(A, args.irredundant) and is_irredundant(A, args.irredundant)
        claims.append(("irredundant k", args.irredundant, irr))
    for name, value, passed in claims:
        out.add(f"{name} {value}", passed)
        ok = ok and passed
    out.add("verdict", ok)
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_ds(args) -> int:
    raw = formats.read_file(args.file, formats.read_ds_raw)
    k = args.k if args.k is not None else raw.k
    out = Report(args.format)
    scheme_ok = verify_difference_scheme(raw.rows, k, raw.d, raw.group)
    out.add("scheme", f"D_{k}({raw.rows.shape[0]},{raw.rows.shape[1]},{raw.d}) over {raw.group} group")
    out.add(f"difference scheme strength {k}", scheme_ok)
    expanded = kronecker_sum_expand(raw.rows, raw.d, raw.group)
    try:
        A = OrthogonalArray(expanded, raw.d)
        oa_ok = verify_strength(A, k)
        out.add(f"expanded array OA({A.r},{A.N},{A.d},{k})", oa_ok)
        out.add("expanded array MD", min_hamming_distance(A))
    except DuplicateRowsError:
        oa_ok = False
        out.add("expanded array rows distinct", False)
    ok = scheme_ok and oa_ok
    out.add("verdict", ok)
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


def _state_from_partition(files: list[str]):
    """Either several OA files, one block each, or an OA file followed by a partition file."""
    kinds = [formats.header_keyword(f) for f in files]
    if len(files) == 2 and kinds == ["oa", "partition"]:
        A = formats.read_file(files[0], formats.read_oa)
        P = formats.read_file(files[1], lambda text: formats.read_partition(text, A))
        return A, list(P.blocks)
    if any(kind != "oa" for kind in kinds):
        raise formats.FormatError("--from-partition takes OA files, or one OA file and one partition file")
    arrays = [formats.read_file(f, formats.read_oa) for f in files]
    if len({(a.N, a.d) for a in arrays}) != 1:
        raise formats.FormatError("block files disagree on N or d")
    rows = np.concatenate([a.entries for a in arrays])
    blocks, start = [], 0
    for a in arrays:
        blocks.append(tuple(range(start, start + a.r)))
        start += a.r
    return OrthogonalArray(rows, arrays[0].d), blocks


def cmd_state(args) -> int:
    out = Report(args.format)
    k = args.check_k
    combinatorial_ok = True
    if args.from_gen:
        G = formats.read_file(args.from_gen, formats.read_gen)
        M = MixedState(tuple(pure_decomposition(G)))
        out.add("source", f"generator matrix {args.from_gen}")
    else:
        if args.from_partition:
            A, blocks = _state_from_partition(args.from_partition)
            out.add("source", "partition " + " ".join(args.from_partition))
        elif args.from_scheme:
            scheme = formats.read_file(args.from_scheme, formats.read_ds)
            P = scheme_to_mixed_state_blocks(scheme)
            A, blocks = P.parent, list(P.blocks)
            k = scheme.k if k is None else k
            out.add("source", f"difference scheme {args.from_scheme}")
        else:
            scheme = formats.read_file(args.from_product, formats.read_ds)
            rep = example16_construction(scheme)
            A, blocks = rep.array, list(rep.partition.blocks)
            k = rep.strength if k is None else k
            out.add("source", f"product construction from {args.from_product}")
        if k is not None:
            report = verify_theorem3(A, blocks, k)
            combinatorial_ok = report.passed
            out.add(f"array strength {k} and block MD >= {k + 1}", report.passed)
        M = mixture_from_blocks(A.entries, blocks, A.d)
    out.add("parties", M.N)
    out.add("local dimension", M.d)
    out.add("components", M.m)
    p = mixture_purity(M)
    out.add("purity", p)
    uni = max_uniformity(M, args.threads, start=k)
    out.add("max uniformity", uni)
    ok = combinatorial_ok
    if k is not None:
        out.add(f"{k}-uniform", uni >= k)
        ok = ok and uni >= k
    if args.export:
        Path(args.export).write_text(formats.write_state(M), encoding="ascii")
        out.add("exported", args.export)
    out.add("verdict", ok)
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reproduce(args) -> int:
    rows = reproduce.run(args.table, args.threads)
    text = reproduce.format_tsv(rows) if args.format == "tsv" else reproduce.format_text(rows)
    sys.stdout.write(text)
    return EXIT_OK if reproduce.all_ok(rows) else EXIT_FAIL


def cmd_search(args) -> int:
    out = Report(args.format)
    if args.kind == "ds":
        r, N, d, k = args.r, args.N, args.d, args.k
        res = search_difference_scheme(r, N, d, k, args.budget, args.nodes, args.group)
        out.add("search", f"D_{k}({r},{N},{d})")
        text = formats.write_ds(res.result) if res.found else None
    else:
        A = formats.read_file(args.oa_file, formats.read_oa)
        res = partition_search(A, args.m, args.k, args.block_strength, args.budget, args.nodes)
        out.add("search", f"partition of {args.oa_file} into {args.m} blocks, MD >= {args.k + 1}")
        text = formats.write_partition(res.result) if res.found else None
    out.add("status", res.status)
    out.add("nodes", res.nodes)
    if text is not None:
        if args.out:
            Path(args.out).write_text(text, encoding="ascii")
            out.add("written", args.out)
        out.emit()
        if not args.out:
            sys.stdout.write(text)
        return EXIT_OK
    out.emit()
    return EXIT_BUDGET if res.status == BUDGET else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--format", choices=["text", "tsv"], default="text")

    parser = argparse.ArgumentParser(prog="kuniform", description="Construct and verify k-uniform mixed states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-gen", parents=[common], help="check a qubit generator matrix")
    p.add_argument("file")
    p.add_argument("--k", type=int)
    p.add_argument("--quantum", action="store_true", help="also synthesize rho and check reductions")
    p.set_defaults(func=cmd_verify_gen)

    p = sub.add_parser("verify-oa", parents=[common], help="measure strength and distance of an array")
    p.add_argument("file")
    p.add_argument("--strength", type=int)
    p.add_argument("--md", type=int)
    p.add_argument("--irredundant", type=int, metavar="K")
    p.set_defaults(func=cmd_verify_oa)

    p = sub.add_parser("verify-ds", parents=[common], help="check a difference scheme")
    p.add_argument("file")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_verify_ds)

    p = sub.add_parser("state", parents=[common], help="build a mixed state and measure it")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--from-partition", nargs="+", metavar="FILE")
    src.add_argument("--from-scheme", metavar="FILE")
    src.add_argument("--from-gen", metavar="FILE")
    src.add_argument("--from-product", metavar="FILE", help="D_3(16,6,4) scheme for the 9-ququart product route")
    p.add_argument("--check-k", type=int)
    p.add_argument("--export", metavar="PATH")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("reproduce", parents=[common], help="rebuild a table of the purity results")
    p.add_argument("--table", choices=["1", "2", "qubit"], required=True)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("search", parents=[common], help="search for a difference scheme or a partition")
    kinds = p.add_subparsers(dest="kind", required=True)
    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget", type=float, default=60.0, help="wall-clock seconds")
    budget.add_argument("--nodes", type=int, help="node limit, for reproducible cut-offs")
    budget.add_argument("--out", metavar="PATH")
    q = kinds.add_parser("ds", parents=[common, budget])
    for name in ("r", "N", "d", "k"):
        q.add_argument(name, type=int)
    q.add_argument("--group", choices=["field", "cyclic"], default="field")
    q = kinds.add_parser("partition", parents=[common, budget])
    q.add_argument("oa_file")
    q.add_argument("m", type=int)
    q.add_argument("k", type=int)
    q.add_argument("--block-strength", type=int)
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (formats.FormatError, FixtureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConstructionError, ValueError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
