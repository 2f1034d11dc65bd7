"""Command-line front end: synth, verify, sweep and identities.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import circuit as ir
from .circuit import entangler_depth, resource_report
from .families import (
    BACKENDS,
    FAMILIES,
    MC_TARGETS,
    PHASE_MODES,
    PROTOCOLS,
    FamilySpec,
    expected_counts,
    measured_count,
    synthesize,
    trotter_ucc_baseline,
    ucc_pauli_terms,
)
from .lowering import lower_to_backend
from .verify import BLOCK_QUBIT_CAP, DEFAULT_TOL, TARGET_QUBIT_CAP, verify_family, verify_identity_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--axes", default="", help="Pauli axes, e.g. XXYZ (family pauli)")
    p.add_argument("--pairs", default="", help="pair kinds over {G,F}, e.g. GGF (families number, parity)")
    p.add_argument("--parity-pairs", default=None,
                   help="comma-separated pair indices conjugated by X (default: none for number, all for parity)")
    p.add_argument("--n", type=int, default=0, help="controls (mcx) or lowered orbitals (ucc)")
    p.add_argument("--m", type=int, default=0, help="raised orbitals (ucc)")
    p.add_argument("--target", choices=MC_TARGETS, default="x", help="mcx target (default x)")
    p.add_argument("--phase-mode", choices=PHASE_MODES, default="exact", help="mcx phase mode (default exact)")
    p.add_argument("--alpha", type=float, default=math.pi / 4, help="rotation angle in radians (default pi/4)")
    p.add_argument("--backend", choices=BACKENDS, default="cnot", help="entangler backend (default cnot)")
    p.add_argument("--protocol", choices=PROTOCOLS, default="decoupling", help="composition protocol (default decoupling)")


def spec_from_args(args: argparse.Namespace, size: int | None = None) -> FamilySpec:
    parity = None
    if args.parity_pairs:
        try:
            parity = tuple(int(x) for x in args.parity_pairs.split(","))
        except ValueError as exc:
            raise UsageError(f"--parity-pairs must be integers: {exc}") from None
    n = args.n if size is None else size
    axes, pairs = args.axes, args.pairs
    if size is not None and args.family == "pauli":
        axes = (args.axes or "X")[0] * size
    if size is not None and args.family in ("number", "parity"):
        pairs = (args.pairs or "G")[0] * (size // 2)
    try:
        return FamilySpec(
            family=args.family,
            alpha=args.alpha,
            backend=args.backend,
            protocol=args.protocol,
            axes=axes,
            pair_kinds=pairs,
            parity_pairs=parity,
            n_controls=n if args.family == "mcx" else 0,
            target=args.target,
            phase_mode=args.phase_mode,
            m=args.m,
            n=n if args.family == "ucc" else 0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _count_lines(spec: FamilySpec, c: ir.Circuit) -> list[str]:
    return [
        f"{e.kind.lower()}={measured_count(c, e)} expected={e.formula}={e.value}" for e in expected_counts(spec)
    ]


def run_synth(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    c = synthesize(spec)
    if args.lower:
        c = lower_to_backend(c, spec.backend)
    text = ir.export(c, args.format)
    if args.output:
        Path(args.output).write_text(text)
    report = resource_report(c)
    for line in _count_lines(spec, c):
        print(line)
    print(json.dumps(report.to_dict(), sort_keys=True))
    if not args.output:
        sys.stdout.write(text)
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    try:
        c = ir.from_json(Path(args.circuit).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read circuit {args.circuit}: {exc}") from None
    if c.num_register != spec.num_register:
        raise UsageError(f"circuit has {c.num_register} register qubits, family needs {spec.num_register}")
    result = verify_family(spec, c, args.tol)
    print(json.dumps(result.to_dict(), sort_keys=True))
    return EXIT_OK if result.passed else EXIT_FAIL


def _parse_sizes(text: str) -> list[int]:
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad size list {text!r}; use e.g. 2-6 or 2,4,8") from None
    return out


def sweep_rows(args: argparse.Namespace) -> list[dict]:
    rows = []
    for size in _parse_sizes(args.sizes):
        row: dict = {"size": size}
        if args.baseline:
            if args.family != "ucc":
                raise UsageError("--baseline applies to the ucc family")
            m = max(args.m, 1)
            spec = spec_from_args(args, size - m)
            base = trotter_ucc_baseline(spec.m, spec.n, args.alpha)
            row["baselineStrings"] = len(ucc_pauli_terms(spec.m, spec.n))
            row["baselineFormula"] = 2 ** (size - 1)
            row["baselineEntanglers"] = resource_report(base).entanglers
        else:
            spec = spec_from_args(args, size)
        c = synthesize(spec)
        report = resource_report(c)
        row["counts"] = dict(sorted(report.counts_by_kind.items()))
        row["entanglerDepth"] = entangler_depth(c)
        row["depth"] = report.depth
        row["expected"] = {e.formula: {"kind": e.kind, "measured": measured_count(c, e), "value": e.value}
                           for e in expected_counts(spec)}
        if c.width <= BLOCK_QUBIT_CAP and spec.num_register <= TARGET_QUBIT_CAP:
            row["distance"] = verify_family(spec, c).distance
        else:
            row["distance"] = "skipped"
        rows.append(row)
    return rows


def _format_row(row: dict) -> str:
    parts = [f"size={row['size']}"]
    for formula, e in row["expected"].items():
        parts.append(f"{e['kind'].lower()}={e['measured']} ({formula}={e['value']})")
    parts.append(f"entangler_depth={row['entanglerDepth']}")
    if "baselineStrings" in row:
        parts.append(f"baseline_strings={row['baselineStrings']} (2^(m+n-1)={row['baselineFormula']})")
    d = row["distance"]
    parts.append(f"distance={d:.2e}" if isinstance(d, float) else f"distance={d}")
    return "  ".join(parts)


def run_sweep(args: argparse.Namespace) -> int:
    rows = sweep_rows(args)
    for row in rows:
        print(_format_row(row))
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2, sort_keys=True))
    return EXIT_OK


def run_identities(args: argparse.Namespace) -> int:
    report = verify_identity_suite()
    for name, value in report.residuals.items():
        print(f"{name:28s} {value:.2e}")
    print("all identities hold" if report.passed else "identity check FAILED")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainsynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a family circuit and print its resource counts")
    _add_family_args(p)
    p.add_argument("--format", choices=("json", "qasm"), default="json")
    p.add_argument("--output", "-o", default=None, help="circuit file (default: standard output)")
    p.add_argument("--lower", action="store_true", help="rewrite into the backend's primitive gates")
    p.set_defaults(func=run_synth)

    p = sub.add_parser("verify", help="check a JSON circuit against the family target")
    _add_family_args(p)
    p.add_argument("--circuit", required=True, help="JSON circuit file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("sweep", help="counts, depth and verification distance over a size range")
    _add_family_args(p)
    p.add_argument("--sizes", required=True, help="sizes, e.g. 2-6 or 2,4,8 (ucc: total m+n)")
    p.add_argument("--baseline", action="store_true", help="ucc only: add the Pauli-string baseline columns")
    p.add_argument("--json", default=None, help="write the rows as JSON")
    p.set_defaults(func=run_sweep)

    p = sub.add_parser("identities", help="evaluate the operator identity suite")
    p.set_defaults(func=run_identities)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
