"""Staircase, decoupling and selection compositions.

A chain is described by its head operator R_1, an ordered list of links and
an end cap.  Link m carries the entangler step U_m (as circuit-time gates)
together with the operators it produces when it extends the string:

    U_m^dag (... R_m ...) U_m = ... (S_m R_{m+1} + S_m_perp + C_m R_{m+1}_perp)

``C_m`` is the carrier of the kernel term.  For the built-in families it is
either S_m itself or, for exchange-type chains, a locally rotated copy of it.
The staircase then realises

    H_hat = (prod S_m) R_end + sum_m (prod_{i<m} S_i) (C_m R_perp_{m+1} + S_perp_m)

conjugated by an optional frame of gates applied before the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .circuit import (
    ANCILLA,
    CNOT,
    GENEXP,
    LOCAL,
    SUPPORT_CX,
    TOFFOLI,
    Circuit,
    Gate,
    QubitRef,
    anc,
    apply_gates,
    inverse_gates,
)
from .operators import SYMBOL_ARITY, tag_matrix

# (coefficient, generator tag, qubits) -- a scaled product of tag symbols
Term = tuple[complex, str, tuple[QubitRef, ...]]
Operator = tuple[Term, ...]

MIRROR_TOL = 1e-12


def term(coeff: complex, tag: str, *qubits: QubitRef) -> Operator:
    return ((coeff, tag, tuple(qubits)),)


def scale(op: Operator, factor: complex) -> Operator:
    return tuple((c * factor, t, q) for c, t, q in op)


@dataclass(frozen=True)
class Layout:
    num_register: int
    num_ancilla: int = 0

    @property
    def width(self) -> int:
        return self.num_register + self.num_ancilla

    def slot(self, q: QubitRef) -> int:
        return q.index if q.role != ANCILLA else self.num_register + q.index


def operator_matrix(op: Operator, layout: Layout) -> np.ndarray:
    out = np.zeros((2**layout.width,) * 2, dtype=complex)
    for coeff, tag, qubits in op:
        out += coeff * la.embed(tag_matrix(tag), [layout.slot(q) for q in qubits], layout.width)
    return out


def gates_unitary(gates: Sequence[Gate], layout: Layout) -> np.ndarray:
    c = Circuit(layout.num_register, layout.num_ancilla, gates)
    return apply_gates(c, np.eye(2**layout.width, dtype=complex))


def rotation_gate(op: Operator, angle: float) -> Gate:
    """[op]^angle for a single-term operator; the coefficient is folded into the angle."""
    if len(op) != 1:
        raise ValueError("rotation gates need a single-term generator")
    coeff, tag, qubits = op[0]
    if abs(coeff.imag if isinstance(coeff, complex) else 0.0) > 1e-15:
        raise ValueError("rotation generator must have a real coefficient")
    angle = float(np.real(coeff)) * angle
    if len(qubits) == 1 and SYMBOL_ARITY.get(tag) == 1:
        return Gate(LOCAL, qubits, angle, tag)
    return Gate(GENEXP, qubits, angle, tag)


@dataclass(frozen=True)
class Link:
    """One string-extending step and the operators it contributes."""

    step: tuple[Gate, ...]
    s: Operator
    s_perp: Operator = ()
    carrier: Operator | None = None
    r_perp: Operator = ()


@dataclass(frozen=True)
class ChainSpec:
    """A staircase: frame, links and end cap over a register (+ ancillas)."""

    layout: Layout
    head: Operator
    links: tuple[Link, ...]
    end: Operator
    alpha: float = math.pi / 4
    frame: tuple[Gate, ...] = ()
    mirror: tuple[Gate, ...] | None = None
    label: str = ""

    @property
    def length(self) -> int:
        return len(self.links)

    def with_alpha(self, alpha: float) -> ChainSpec:
        return ChainSpec(self.layout, self.head, self.links, self.end, alpha, self.frame, self.mirror, self.label)


def _chain_gates(spec: ChainSpec) -> tuple[Gate, ...]:
    """Circuit-time gates of W (frame first, then the last link's step, ..., the first link's step)."""
    gates: list[Gate] = list(spec.frame)
    for link in reversed(spec.links):
        gates.extend(link.step)
    return tuple(gates)


def staircase_gates(spec: ChainSpec, alpha: float | None = None) -> tuple[Gate, ...]:
    a = spec.alpha if alpha is None else alpha
    w = _chain_gates(spec)
    return w + (rotation_gate(spec.head, a),) + inverse_gates(w)


def build_staircase(spec: ChainSpec) -> Circuit:
    """[H_hat]^alpha = W^dag [R_1]^alpha W."""
    return Circuit(spec.layout.num_register, spec.layout.num_ancilla, staircase_gates(spec))


def _frame_conjugate(spec: ChainSpec, m: np.ndarray) -> np.ndarray:
    if not spec.frame:
        return m
    f = gates_unitary(spec.frame, spec.layout)
    return f.conj().T @ m @ f


def hhat_closed_form(spec: ChainSpec) -> np.ndarray:
    """Dense evaluation of the staircase Hamiltonian from the link data alone."""
    lay = spec.layout
    prefix = np.eye(2**lay.width, dtype=complex)
    total = np.zeros_like(prefix)
    for link in spec.links:
        s = operator_matrix(link.s, lay)
        carrier = s if link.carrier is None else operator_matrix(link.carrier, lay)
        total += prefix @ (carrier @ operator_matrix(link.r_perp, lay) + operator_matrix(link.s_perp, lay))
        prefix = prefix @ s
    total += prefix @ operator_matrix(spec.end, lay)
    return _frame_conjugate(spec, total)


def hbar_matrix(spec: ChainSpec) -> np.ndarray:
    """The wanted string (prod S_i) R_end, in the same frame as the closed form."""
    lay = spec.layout
    prod = np.eye(2**lay.width, dtype=complex)
    for link in spec.links:
        prod = prod @ operator_matrix(link.s, lay)
    return _frame_conjugate(spec, prod @ operator_matrix(spec.end, lay))


def residue_matrix(spec: ChainSpec) -> np.ndarray:
    return hhat_closed_form(spec) - hbar_matrix(spec)


def mirror_defect(spec: ChainSpec, mirror: Sequence[Gate]) -> float:
    """max |M^dag H_hat M - (Sigma_res - H_bar)|."""
    m = gates_unitary(mirror, spec.layout)
    hhat = hhat_closed_form(spec)
    hbar = hbar_matrix(spec)
    return float(np.abs(m.conj().T @ hhat @ m - (hhat - 2 * hbar)).max())


def default_mirror(spec: ChainSpec, site: QubitRef | None = None) -> tuple[Gate, ...]:
    """First pi/2 Pauli rotation on ``site`` (default: the end cap's last qubit) that flips H_bar only."""
    if site is None:
        site = spec.end[0][2][-1]
    candidates = [Gate(LOCAL, (site,), sgn * math.pi / 2, axis) for sgn in (1, -1) for axis in "XYZ"]
    for g in candidates:
        if mirror_defect(spec, (g,)) <= MIRROR_TOL:
            return (g,)
    raise ValueError(f"no single-qubit pi/2 mirror on {site} flips the string without touching the residue")


def decoupling_gates(spec: ChainSpec) -> tuple[Gate, ...]:
    mirror = spec.mirror if spec.mirror is not None else default_mirror(spec)
    if mirror_defect(spec, mirror) > MIRROR_TOL:
        raise ValueError("mirror does not anticommute with the string while fixing the residue")
    # matrix order [H]^a M^dag [H]^-a M: M acts first in time
    return (
        tuple(mirror)
        + staircase_gates(spec, -spec.alpha)
        + inverse_gates(mirror)
        + staircase_gates(spec, spec.alpha)
    )


def build_decoupling(spec: ChainSpec) -> Circuit:
    """[H_bar]^(2 alpha) = [H_hat]^alpha M^dag [H_hat]^-alpha M.

    Full-rank chains have no residue, so the plain staircase is returned.
    """
    if all(not link.s_perp and not link.r_perp for link in spec.links):
        return build_staircase(spec)
    return Circuit(spec.layout.num_register, spec.layout.num_ancilla, decoupling_gates(spec))


# --- selection ------------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """A support projector (tag of P/K symbols) that must hold for the string to act."""

    tag: str
    qubits: tuple[QubitRef, ...]


def build_ctot(conditions: Sequence[Condition], first_ancilla: int = 0) -> tuple[list[Gate], Condition]:
    """Pairwise AND of ``conditions`` into fresh ancillas; returns (gates, root condition).

    Consecutive conditions are merged level by level; an odd one out is
    promoted unchanged, so later levels mix register and ancilla controls.
    """
    if len(conditions) < 1:
        raise ValueError("need at least one condition")
    level = list(conditions)
    gates: list[Gate] = []
    next_anc = first_ancilla
    while len(level) > 1:
        merged: list[Condition] = []
        for i in range(0, len(level) - 1, 2):
            a, b = level[i], level[i + 1]
            target = anc(next_anc)
            next_anc += 1
            qubits = a.qubits + b.qubits + (target,)
            if a.tag == "P" and b.tag == "P":
                gates.append(Gate(TOFFOLI, qubits))
            else:
                gates.append(Gate(SUPPORT_CX, qubits, math.pi / 2, a.tag + b.tag + "X"))
            merged.append(Condition("P", (target,)))
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return gates, level[0]


def ctot_circuit(n: int) -> Circuit:
    """C_tot over n register projector conditions P_0..P_{n-1}."""
    if n < 2:
        raise ValueError("C_tot needs at least two conditions")
    conds = [Condition("P", (QubitRef("register", i),)) for i in range(n)]
    gates, _ = build_ctot(conds)
    return Circuit(n, n - 1, gates)


@dataclass(frozen=True)
class SelectionSpec:
    """Ancilla-assisted composition U_tot^dag C_tot^dag (C[R_1]^alpha) C_tot U_tot."""

    layout: Layout
    head: Operator
    utot: tuple[Gate, ...] = ()
    conditions: tuple[Condition, ...] = ()
    alpha: float = math.pi / 4
    frame: tuple[Gate, ...] = ()
    central: Gate | None = None
    label: str = ""


def central_gate(head: Operator, root: Condition | None, alpha: float) -> Gate:
    """R_1 rotation restricted to the root condition (plain rotation when unconditioned)."""
    if root is None:
        return rotation_gate(head, alpha)
    (coeff, tag, qubits), = head
    return Gate(GENEXP, root.qubits + qubits, float(np.real(coeff)) * alpha, root.tag + tag)


def selection_gates(spec: SelectionSpec) -> tuple[Gate, ...]:
    need = max(len(spec.conditions) - 1, 0)
    if spec.layout.num_ancilla < need:
        raise ValueError(f"selection over {len(spec.conditions)} conditions needs {need} ancillas")
    if spec.conditions:
        ctot, root = build_ctot(spec.conditions)
    else:
        ctot, root = [], None
    central = spec.central if spec.central is not None else central_gate(spec.head, root, spec.alpha)
    pre = tuple(spec.frame) + tuple(spec.utot) + tuple(ctot)
    return pre + (central,) + inverse_gates(pre)


def build_selection(spec: SelectionSpec) -> Circuit:
    return Circuit(spec.layout.num_register, spec.layout.num_ancilla, selection_gates(spec))


@dataclass(frozen=True)
class MergeStep:
    """One entangler of a merge tree that extends the string from ``source`` to ``dest``."""

    source: int
    dest: int
    layer: int


def merge_tree(n: int) -> list[MergeStep]:
    """Doubling schedule over sites 0..n-1: every string site recruits the next unused one per layer."""
    if n < 1:
        raise ValueError("merge tree needs at least one site")
    steps: list[MergeStep] = []
    have = 1
    layer = 0
    while have < n:
        layer += 1
        grow = min(have, n - have)
        steps.extend(MergeStep(i, have + i, layer) for i in range(grow))
        have += grow
    return steps


@dataclass(frozen=True)
class TreeStep:
    gates: tuple[Gate, ...]
    layer: int


def build_utot(steps: Sequence[TreeStep]) -> tuple[Gate, ...]:
    """Circuit-time gates of U_tot: the last layer runs first so layer 1 conjugates R_1 first."""
    out: list[Gate] = []
    for layer in sorted({s.layer for s in steps}, reverse=True):
        for s in steps:
            if s.layer == layer:
                out.extend(s.gates)
    return tuple(out)
