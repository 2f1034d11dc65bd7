"""Rewriting circuits into a backend's native entangler plus local rotations.

Backends and their primitive gates:

* ``cnot``  -- CNOT and LocalRot
* ``msg``   -- MSG (XX-rotations at +-pi/4) and LocalRot
* ``iswap`` -- iSWAP (exchange at +-pi/2), partial exchange GenExp "G" and LocalRot

Every registered expansion is exact up to a global phase.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable

import numpy as np

from . import linalg as la
from .circuit import (
    CNOT,
    GENEXP,
    ISWAP,
    LOCAL,
    MSG,
    REL_TOFFOLI,
    SUPPORT_CX,
    TOFFOLI,
    Circuit,
    Gate,
    QubitRef,
    apply_gates,
    cnot,
    local,
    reg,
)
from .operators import tag_matrix

BACKEND_PRIMITIVES = {
    "cnot": frozenset({CNOT, LOCAL}),
    "msg": frozenset({MSG, LOCAL}),
    "iswap": frozenset({ISWAP, LOCAL}),
}
# partial exchange rotations are native to exchange-coupled hardware
_ISWAP_GENERATORS = frozenset({"G"})
ANGLE_TOL = 1e-12

_QUARTER_TURNS = [None] + [(a, s * math.pi / 4) for a in "XYZ" for s in (1, -1)]
_FRAME_CANDIDATES = _QUARTER_TURNS + [(a, math.pi / 2) for a in "XYZ"]


def is_primitive(g: Gate, backend: str) -> bool:
    if g.kind in BACKEND_PRIMITIVES[backend]:
        return True
    return backend == "iswap" and g.kind == GENEXP and g.generator in _ISWAP_GENERATORS


@lru_cache(maxsize=None)
def basis_frame(source: str, target: str, sign: int = 1):
    """(axis, angle) of a local rotation g with g^dag source g = sign * target; None for identity."""
    s = tag_matrix(source)
    t = sign * tag_matrix(target)
    for cand in _FRAME_CANDIDATES:
        g = np.eye(2) if cand is None else la.expm_generator(tag_matrix(cand[0]), cand[1])
        if np.abs(g.conj().T @ s @ g - t).max() < 1e-12:
            return cand
    raise ValueError(f"no single-qubit frame maps {source} to {sign:+d}{target}")


def frame_gates(cand, q: QubitRef) -> list[Gate]:
    return [] if cand is None else [local(cand[0], q, cand[1])]


def _undo(gates: list[Gate]) -> list[Gate]:
    return [g.inverse() for g in reversed(gates)]


# --- Pauli decomposition route --------------------------------------------


@lru_cache(maxsize=256)
def pauli_terms(tag: str) -> tuple[tuple[float, str], ...]:
    """Real Pauli expansion of a Hermitian generator tag over its own qubits."""
    m = tag_matrix(tag)
    w = la.num_qubits_of(m)
    out = []
    for axes in itertools.product("IXYZ", repeat=w):
        p = la.tensor(*(la.I2 if a == "I" else tag_matrix(a) for a in axes))
        c = np.trace(p @ m) / 2**w
        if abs(c) > 1e-14:
            if abs(c.imag) > 1e-12:
                raise ValueError(f"generator {tag!r} is not Hermitian")
            out.append((float(c.real), "".join(axes)))
    strings = [la.tensor(*(la.I2 if a == "I" else tag_matrix(a) for a in axes)) for _, axes in out]
    for a, b in itertools.combinations(strings, 2):
        if np.abs(la.commutator(a, b)).max() > 1e-12:
            raise ValueError(f"generator {tag!r} has non-commuting Pauli terms; no exact product form")
    return tuple(out)


def _quarter_multiple(theta: float) -> int | None:
    k = theta / (math.pi / 2)
    r = round(k)
    return int(r) if abs(k - r) < ANGLE_TOL else None


def pauli_rotation(axes: str, qubits: tuple[QubitRef, ...], theta: float) -> list[Gate]:
    """exp(-i theta P) for a Pauli string P via a CNOT ladder (locals only at multiples of pi/2)."""
    sites = [(a, q) for a, q in zip(axes, qubits) if a != "I"]
    if not sites:
        return []
    k = _quarter_multiple(theta)
    if k is not None:
        # exp(-i k pi/2 P) is +-1 or -+iP: a product of local pi/2 rotations up to phase
        return [local(a, q, math.pi / 2) for a, q in sites] if k % 2 else []
    if len(sites) == 1:
        a, q = sites[0]
        return [local(a, q, theta)]
    pre: list[Gate] = []
    for a, q in sites:
        # g^dag Z g = a, so exp(-i t a) = g^dag exp(-i t Z) g
        pre += frame_gates(basis_frame("Z", a), q)
    ladder = [cnot(sites[i][1], sites[i + 1][1]) for i in range(len(sites) - 1)]
    core = pre + ladder
    return core + [local("Z", sites[-1][1], theta)] + _undo(core)


def generator_rotation(tag: str, qubits: tuple[QubitRef, ...], theta: float) -> list[Gate]:
    out: list[Gate] = []
    for coeff, axes in pauli_terms(tag):
        out += pauli_rotation(axes, qubits, coeff * theta)
    return out


# --- registered expansions into CNOT + locals -----------------------------


def _hadamard(q: QubitRef) -> Gate:
    return local("H", q, math.pi / 2)


def expand_rel_toffoli(g: Gate) -> list[Gate]:
    """[P_a P_b X_t]^theta with four CNOTs: P_a P_b Z_t = (Z_t - Z_a Z_t - Z_b Z_t + Z_a Z_b Z_t)/4."""
    a, b, t = g.qubits
    q = g.angle / 4
    body = [
        local("Z", t, q),
        cnot(a, t),
        local("Z", t, -q),
        cnot(b, t),
        local("Z", t, q),
        cnot(a, t),
        local("Z", t, -q),
        cnot(b, t),
    ]
    return [_hadamard(t)] + body + [_hadamard(t).inverse()]


def expand_toffoli(g: Gate) -> list[Gate]:
    """Textbook six-CNOT Toffoli; T = [Z]^(pi/8) up to phase."""
    a, b, t = g.qubits
    e = math.pi / 8
    return [
        _hadamard(t),
        cnot(b, t),
        local("Z", t, -e),
        cnot(a, t),
        local("Z", t, e),
        cnot(b, t),
        local("Z", t, -e),
        cnot(a, t),
        local("Z", b, e),
        local("Z", t, e),
        _hadamard(t).inverse(),
        cnot(a, b),
        local("Z", a, e),
        local("Z", b, -e),
        cnot(a, b),
    ]


def expand_generic(g: Gate) -> list[Gate]:
    return generator_rotation(g.generator, g.qubits, g.angle)


# --- backend-specific entangler rewrites ----------------------------------


def cnot_to_msg(g: Gate) -> list[Gate]:
    """CNOT = [Z_c]^(pi/4) [X_t]^(pi/4) [Z_c X_t]^(-pi/4) up to phase; Z_c X_t = H_c X_c X_t H_c."""
    c, t = g.qubits
    return [
        local("Z", c, math.pi / 4),
        local("X", t, math.pi / 4),
        _hadamard(c),
        Gate(MSG, (c, t), -math.pi / 4),
        _hadamard(c).inverse(),
    ]


@lru_cache(maxsize=None)
def _iswap_zx_frame():
    """Frame f on the target and sign s with iSWAP; [X_c]^(s*theta); iSWAP^dag == [Z_c X_t]^theta."""
    theta = 0.37
    want = la.expm_generator(np.kron(la.Z, la.X), theta)
    for cand, s in itertools.product(_FRAME_CANDIDATES, (1, -1)):
        f = frame_gates(cand, reg(1))
        seq = f + [Gate(ISWAP, (reg(0), reg(1))), local("X", reg(0), s * theta), Gate(ISWAP, (reg(0), reg(1)), -math.pi / 2)] + _undo(f)
        u = apply_gates(Circuit(2, 0, seq), np.eye(4))
        if la.phase_distance(u, want) < 1e-12:
            return cand, s
    raise RuntimeError("no local frame turns the iSWAP conjugate of X into Z x X")


def cnot_to_iswap(g: Gate) -> list[Gate]:
    """Two iSWAPs: the Z_c X_t part of the CNOT is an iSWAP-conjugated X_c rotation."""
    c, t = g.qubits
    cand, s = _iswap_zx_frame()
    f = frame_gates(cand, t)
    theta = -math.pi / 4
    zx = f + [Gate(ISWAP, (c, t)), local("X", c, s * theta), Gate(ISWAP, (c, t), -math.pi / 2)] + _undo(f)
    return [local("Z", c, math.pi / 4), local("X", t, math.pi / 4)] + zx


@lru_cache(maxsize=None)
def _f_frame():
    """Z quarter-turn on the first qubit of a pair with g^dag G g = F."""
    for cand in _QUARTER_TURNS[1:]:
        if cand[0] != "Z":
            continue
        g = np.kron(la.expm_generator(la.Z, cand[1]), la.I2)
        if np.abs(g.conj().T @ tag_matrix("G") @ g - tag_matrix("F")).max() < 1e-12:
            return cand
    raise RuntimeError("no Z quarter-turn maps G to F")


def exchange_rotation_f(a: QubitRef, b: QubitRef, theta: float) -> list[Gate]:
    """[F_ab]^theta = g^dag [G_ab]^theta g with g a Z quarter-turn on a."""
    f = frame_gates(_f_frame(), a)
    return f + [_exchange(a, b, theta)] + _undo(f)


def _exchange(a: QubitRef, b: QubitRef, theta: float) -> Gate:
    if abs(abs(theta) - math.pi / 2) < ANGLE_TOL:
        return Gate(ISWAP, (a, b), theta)
    return Gate(GENEXP, (a, b), theta, "G")


def zg_to_iswap(g: Gate) -> list[Gate]:
    """[Z_i G_kl]^alpha = [F_il]^(pi/2) [G_ik]^alpha [F_il]^(-pi/2): two iSWAPs and one partial exchange."""
    i, k, l = g.qubits
    # rightmost factor acts first
    return exchange_rotation_f(i, l, -math.pi / 2) + [_exchange(i, k, g.angle)] + exchange_rotation_f(i, l, math.pi / 2)


Expansion = Callable[[Gate], list[Gate]]

# expansions shared by every backend: everything reduces to CNOT + locals
_COMMON: dict[str, Expansion] = {
    REL_TOFFOLI: expand_rel_toffoli,
    TOFFOLI: expand_toffoli,
    GENEXP: expand_generic,
    SUPPORT_CX: expand_generic,
    ISWAP: expand_generic,
    MSG: expand_generic,
}
_BACKEND: dict[str, dict[str, Expansion]] = {
    "cnot": {},
    "msg": {CNOT: cnot_to_msg},
    "iswap": {CNOT: cnot_to_iswap},
}


def expansion_for(g: Gate, backend: str) -> Expansion:
    if backend == "iswap" and g.kind == GENEXP and g.generator == "ZG":
        return zg_to_iswap
    table = _BACKEND[backend]
    if g.kind in table:
        return table[g.kind]
    if g.kind in _COMMON:
        return _COMMON[g.kind]
    raise ValueError(f"no registered expansion of {g.kind} for backend {backend!r}")


def lower_gate(g: Gate, backend: str) -> list[Gate]:
    if backend not in BACKEND_PRIMITIVES:
        raise ValueError(f"unknown backend {backend!r}; expected one of {sorted(BACKEND_PRIMITIVES)}")
    if is_primitive(g, backend):
        return [g]
    out: list[Gate] = []
    for h in expansion_for(g, backend)(g):
        out += lower_gate(h, backend)
    return out


def lower_to_backend(c: Circuit, backend: str) -> Circuit:
    """Same unitary (up to global phase), built only from the backend's primitives."""
    gates: list[Gate] = []
    for g in c.gates:
        gates += lower_gate(g, backend)
    return Circuit(c.num_register, c.num_ancilla, gates)
