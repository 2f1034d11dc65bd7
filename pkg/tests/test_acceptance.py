"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Dense targets are built independently of the synthesis code (numpy products of
Pauli/projector matrices, exponentiated with scipy.linalg.expm).
"""

from __future__ import annotations

import math
import time

import numpy as np
import scipy.linalg as sl

from chainsynth import linalg as la
from chainsynth.circuit import CNOT, TOFFOLI, Circuit, anc, entangler_depth, reg
from chainsynth.families import (
    FamilySpec,
    expected_counts,
    measured_count,
    multicontrol_chain,
    number_conserving_chain,
    pauli_chain,
    rotation_chain,
    synth_ucc,
    synthesize,
    trotter_ucc_baseline,
    ucc_chain,
    ucc_pauli_terms,
)
from chainsynth.lowering import lower_to_backend
from chainsynth.protocols import Layout, build_staircase, hbar_matrix, hhat_closed_form, residue_matrix
from chainsynth.verify import circuit_unitary, register_block, verify_family, verify_identity_suite

ALPHAS = (0.3, math.pi / 4, 1.1)
PAIR_KINDS = "GFGFG"


def pauli_string(axes: str) -> np.ndarray:
    mats = {"X": la.X, "Y": la.Y, "Z": la.Z}
    return la.tensor(*(mats[a] for a in axes))


def ucc_oracle(m: int, n: int) -> np.ndarray:
    raise_ = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    op = la.tensor(*([raise_] * m + [raise_.T] * n))
    return op + op.conj().T


# --- circuit sets reused by several criteria -------------------------------


def decoupling_specs() -> list[FamilySpec]:
    specs = []
    for alpha in ALPHAS:
        specs += [FamilySpec("mcx", alpha, n_controls=n, target="rotation") for n in range(2, 7)]
        specs += [FamilySpec("number", alpha, pair_kinds=PAIR_KINDS[: q // 2]) for q in (4, 6, 8)]
        specs += [FamilySpec("ucc", alpha, m=m, n=k - m) for k in range(2, 6) for m in range(1, k)]
    specs += [FamilySpec("mcx", n_controls=n, target=t) for n in range(2, 7) for t in ("x", "z")]
    return specs


def selection_specs() -> list[FamilySpec]:
    rng = np.random.default_rng(7)
    specs = [
        FamilySpec("pauli", 0.3, protocol="selection", axes="".join(rng.choice(list("XYZ"), n)))
        for n in range(2, 9)
    ]
    specs += [FamilySpec("mcx", protocol="selection", n_controls=n) for n in (2, 3, 4, 5, 8)]
    return specs


def chain_specs():
    """Staircase chains of length 1..5 per family (number-conserving capped at 4 pairs)."""
    rng = np.random.default_rng(11)
    out = []
    for length in range(1, 6):
        axes = "".join(rng.choice(list("XYZ"), length + 1))
        for backend in ("cnot", "msg", "iswap"):
            out.append((f"pauli {axes} {backend}", pauli_chain(axes, 0.3, backend)))
        sites = [reg(i) for i in range(length)] + [anc(0), reg(length)]
        out.append((f"mcx n={length}", multicontrol_chain(sites, Layout(length + 1, 1), 0.7)))
        out.append((f"mcx rotation n={length}", rotation_chain(length, 0.7)))
        out.append((f"ucc m=1 n={length}", ucc_chain(1, length, 0.4)))
        if length <= 3:
            kinds = PAIR_KINDS[: length + 1]
            out.append((f"number {kinds}", number_conserving_chain(kinds, 1.1)))
            out.append((f"parity {kinds}", number_conserving_chain(kinds, 1.1, True)))
    return out


# --- criteria ---------------------------------------------------------------


def test_criterion_1_identity_suite(criterion):
    report = verify_identity_suite()
    worst = max(report.residuals.values())
    ok = report.passed and worst <= 1e-12 and report.runtime < 1.0
    criterion(1, ok, f"{len(report.residuals)} identities, max residual {worst:.1e}, {report.runtime:.3f}s")
    assert ok


def test_criterion_2_staircase_closed_form(criterion):
    start = time.perf_counter()
    worst_u = worst_c = 0.0
    for label, spec in chain_specs():
        u = circuit_unitary(build_staircase(spec))
        expected = sl.expm(-1j * spec.alpha * hhat_closed_form(spec))
        worst_u = max(worst_u, float(np.abs(u - expected).max()))
        res, hbar = residue_matrix(spec), hbar_matrix(spec)
        worst_c = max(worst_c, float(np.abs(res @ hbar - hbar @ res).max()))
    runtime = time.perf_counter() - start
    ok = worst_u <= 1e-10 and worst_c <= 1e-12 and runtime < 10
    criterion(2, ok, f"unitary error {worst_u:.1e}, residue commutator {worst_c:.1e}, {runtime:.2f}s")
    assert ok


def test_criterion_3_decoupling(criterion):
    start = time.perf_counter()
    worst = 0.0
    for spec in decoupling_specs():
        c = synthesize(spec)
        block, leak = register_block(c)
        if spec.family == "mcx" and spec.target != "rotation":
            n = spec.n_controls
            proj = la.tensor(*([la.P1] * n))
            op = la.X if spec.target == "x" else la.Z
            target = np.eye(2 ** (n + 1)) + np.kron(proj, op - np.eye(2))
        else:
            if spec.family == "mcx":
                h = np.kron(la.tensor(*([la.P1] * spec.n_controls)), la.X)
            elif spec.family == "ucc":
                h = ucc_oracle(spec.m, spec.n)
            else:
                mats = {"G": (pauli_string("XX") + pauli_string("YY")) / 2,
                        "F": (pauli_string("XY") - pauli_string("YX")) / 2}
                h = la.tensor(*(mats[k] for k in spec.pair_kinds))
            target = sl.expm(-2j * spec.alpha * h)
        worst = max(worst, la.phase_distance(block, target), leak)
    runtime = time.perf_counter() - start
    ok = worst <= 1e-9 and runtime < 60
    criterion(3, ok, f"{len(decoupling_specs())} circuits, max distance {worst:.1e}, {runtime:.2f}s")
    assert ok


def test_criterion_4_selection(criterion):
    worst_d = worst_leak = 0.0
    anc_ok = True
    for spec in selection_specs():
        c = synthesize(spec)
        if spec.family == "pauli":
            anc_ok &= c.num_ancilla == 0
            target = sl.expm(-1j * spec.alpha * pauli_string(spec.axes))
        else:
            n = spec.n_controls
            anc_ok &= c.num_ancilla == n - 1
            target = np.eye(2 ** (n + 1)) + np.kron(la.tensor(*([la.P1] * n)), la.X - np.eye(2))
        block, leak = register_block(c)
        worst_d = max(worst_d, la.phase_distance(block, target))
        worst_leak = max(worst_leak, leak)
    ok = anc_ok and worst_d <= 1e-9 and worst_leak <= 1e-10
    criterion(4, ok, f"block distance {worst_d:.1e}, leakage {worst_leak:.1e}, ancilla counts ok={anc_ok}")
    assert ok


def count_checks() -> list[tuple[str, int, int]]:
    rows = []
    for backend in ("cnot", "msg", "iswap"):
        for n in range(1, 9):
            spec = FamilySpec("pauli", 0.3, backend, "staircase", axes=("XYZ" * 3)[:n])
            c = synthesize(spec)
            rows.append((f"pauli {backend} n={n} 2(n-1)", sum(g.is_entangler for g in c.gates), 2 * (n - 1)))
    for n in range(2, 7):
        spec = FamilySpec("mcx", n_controls=n)
        c = synthesize(spec)
        e, = expected_counts(spec)
        rows.append((f"mcx decoupling n={n} 4n-2", measured_count(c, e), 4 * n - 2))
        lowered = lower_to_backend(c, "cnot")
        rows.append((f"mcx lowered n={n} 16n-8", sum(g.kind == CNOT for g in lowered.gates), 16 * n - 8))
    for n in (2, 3, 4, 5, 8):
        c = synthesize(FamilySpec("mcx", protocol="selection", n_controls=n))
        rows.append((f"mcx selection n={n} 2(n-1)", sum(g.kind == TOFFOLI for g in c.gates), 2 * (n - 1)))
    for q in (4, 6, 8, 10):
        spec = FamilySpec("number", pair_kinds=PAIR_KINDS[: q // 2])
        e, = expected_counts(spec)
        rows.append((f"number n={q} 2n-4", measured_count(synthesize(spec), e), 2 * q - 4))
    for k in range(2, 6):
        for m in range(1, k):
            spec = FamilySpec("ucc", m=m, n=k - m, backend="iswap")
            c = synthesize(spec)
            swaps, tof = expected_counts(spec)
            rows.append((f"ucc m={m} n={k - m} iSWAP 4(m+n-1)", measured_count(c, swaps), 4 * (k - 1)))
            rows.append((f"ucc m={m} n={k - m} RelPhaseToffoli 4(m+n)", measured_count(c, tof), 4 * k))
            rows.append((f"ucc m={m} n={k - m} baseline 2^(m+n-1)", len(ucc_pauli_terms(m, k - m)), 2 ** (k - 1)))
    return rows


def test_criterion_5_counts(criterion):
    rows = count_checks()
    bad = [(name, got, want) for name, got, want in rows if got != want]
    detail = f"{len(rows) - len(bad)}/{len(rows)} formulas exact"
    if bad:
        kinds = sorted({name.split(" ", 1)[0] + " " + name.rsplit(" ", 1)[-1] for name, _, _ in bad})
        sample = ", ".join(f"{name}: got {got}" for name, got, _ in bad[:3])
        detail += f"; mismatches in {kinds}; e.g. {sample}"
    criterion(5, not bad, detail)
    assert not bad, bad


def test_criterion_6_depth(criterion):
    sel = {n: entangler_depth(synthesize(FamilySpec("mcx", protocol="selection", n_controls=n))) for n in (2, 4, 8)}
    sel_ok = all(d == 2 * int(math.log2(n)) + 1 for n, d in sel.items())
    dec = {n: entangler_depth(synthesize(FamilySpec("mcx", n_controls=n))) for n in range(2, 7)}
    dec_ok = all(4 * n - 2 <= d <= 4 * n + 4 for n, d in dec.items())
    nc = {}
    for q in (4, 8):
        c = synthesize(FamilySpec("number", protocol="selection", pair_kinds="G" * (q // 2)))
        nc[q] = (entangler_depth(c), 4 * math.log2(q) + 3)
    nc_text = ", ".join(f"n={q}: {d} vs 4log2(n)+3={ref:g} (diff {d - ref:+g})" for q, (d, ref) in nc.items())
    ok = sel_ok and dec_ok
    criterion(6, ok, f"selection depth {sel}, decoupling depth {dec}; number-conserving selection {nc_text}")
    assert ok


def test_criterion_7_baseline(criterion):
    worst = 0.0
    table = []
    for k in range(2, 6):
        for m in range(1, k):
            alpha = 0.3
            ours = synth_ucc(m, k - m, alpha)
            base = trotter_ucc_baseline(m, k - m, 2 * alpha)
            b_ours, _ = register_block(ours)
            worst = max(worst, la.phase_distance(b_ours, circuit_unitary(base)))
            table.append(f"{m}+{k - m}: {sum(g.is_entangler for g in ours.gates)} vs "
                         f"{sum(g.is_entangler for g in base.gates)}")
    ok = worst <= 1e-9
    criterion(7, ok, f"max distance {worst:.1e}; entanglers ours vs baseline {'; '.join(table)}")
    assert ok


def mutation_circuits() -> list[tuple[FamilySpec, Circuit]]:
    specs = [s for s in decoupling_specs() if s.alpha == 0.3 or s.family == "mcx" and s.target != "rotation"]
    specs += selection_specs()
    specs += [FamilySpec("pauli", 0.3, b, "staircase", axes="XYZZ"[:n]) for b in ("cnot", "msg", "iswap")
              for n in range(2, 5)]
    return [(s, synthesize(s)) for s in specs]


def test_criterion_8_mutation(criterion):
    survivors = []
    total = 0
    for spec, c in mutation_circuits():
        for pos, g in enumerate(c.gates):
            if not g.is_entangler:
                continue
            total += 1
            result = verify_family(spec, c.without(pos))
            if max(result.distance, result.subspace_leakage) <= 1e-3:
                survivors.append((spec, pos, g.kind))
    ok = not survivors
    criterion(8, ok, f"{total} single-entangler deletions, {len(survivors)} survived")
    assert ok, survivors[:5]
