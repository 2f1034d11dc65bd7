"""Gate and circuit representation, resource metrics and serialization."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import linalg as la
from .operators import tag_arity, tag_matrix

CNOT = "CNOT"
TOFFOLI = "Toffoli"
REL_TOFFOLI = "RelPhaseToffoli"
ISWAP = "iSWAP"
MSG = "MSG"
LOCAL = "LocalRot"
GENEXP = "GenExp"
SUPPORT_CX = "SupportControlX"

KINDS = (CNOT, TOFFOLI, REL_TOFFOLI, ISWAP, MSG, LOCAL, GENEXP, SUPPORT_CX)

# kind -> (implicit generator tag, default angle); None tag means the gate is not an exponential
_EXP_KINDS = {
    REL_TOFFOLI: ("PPX", math.pi / 2),
    ISWAP: ("G", math.pi / 2),
    MSG: ("XX", math.pi / 4),
    LOCAL: (None, None),
    GENEXP: (None, None),
    SUPPORT_CX: (None, math.pi / 2),
}
_FIXED_ARITY = {CNOT: 2, TOFFOLI: 3, REL_TOFFOLI: 3, ISWAP: 2, MSG: 2, LOCAL: 1}

REGISTER = "register"
ANCILLA = "ancilla"


@dataclass(frozen=True, order=True)
class QubitRef:
    role: str
    index: int

    def __post_init__(self):
        if self.role not in (REGISTER, ANCILLA):
            raise ValueError(f"unknown qubit role {self.role!r}")
        if self.index < 0:
            raise ValueError("qubit index must be non-negative")

    def __str__(self) -> str:
        return f"{'q' if self.role == REGISTER else 'anc'}[{self.index}]"


def reg(i: int) -> QubitRef:
    return QubitRef(REGISTER, i)


def anc(i: int) -> QubitRef:
    return QubitRef(ANCILLA, i)


@dataclass(frozen=True)
class Gate:
    """One gate.  Exponential kinds implement exp(-i * angle * generator)."""

    kind: str
    qubits: tuple[QubitRef, ...]
    angle: float | None = None
    generator: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} acts on repeated qubits {self.qubits}")
        if self.kind in _EXP_KINDS:
            implicit, default = _EXP_KINDS[self.kind]
            if self.generator is None:
                if implicit is None:
                    raise ValueError(f"{self.kind} needs a generator tag")
                object.__setattr__(self, "generator", implicit)
            if self.angle is None:
                if default is None:
                    raise ValueError(f"{self.kind} needs an angle")
                object.__setattr__(self, "angle", default)
            object.__setattr__(self, "angle", float(self.angle))
        if len(self.qubits) != self.arity:
            raise ValueError(f"{self.kind} expects {self.arity} qubits, got {len(self.qubits)}")
        if self.kind == SUPPORT_CX and not self.generator.endswith("X"):
            raise ValueError("SupportControlX generator must end with the target X")

    @property
    def arity(self) -> int:
        if self.kind in _FIXED_ARITY:
            return _FIXED_ARITY[self.kind]
        return tag_arity(self.generator)

    @property
    def is_entangler(self) -> bool:
        return len(self.qubits) > 1

    def matrix(self) -> np.ndarray:
        return _gate_matrix(self.kind, self.generator, self.angle)

    def inverse(self) -> Gate:
        if self.kind in (CNOT, TOFFOLI):
            return self
        return Gate(self.kind, self.qubits, -self.angle, self.generator)

    def on(self, *qubits: QubitRef) -> Gate:
        return Gate(self.kind, tuple(qubits), self.angle, self.generator)


@lru_cache(maxsize=4096)
def _gate_matrix(kind: str, generator: str | None, angle: float | None) -> np.ndarray:
    if kind == CNOT:
        m = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    elif kind == TOFFOLI:
        m = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]
    else:
        m = la.expm_generator(tag_matrix(generator), angle)
    m.setflags(write=False)
    return m


def cnot(c: QubitRef, t: QubitRef) -> Gate:
    return Gate(CNOT, (c, t))


def toffoli(c1: QubitRef, c2: QubitRef, t: QubitRef) -> Gate:
    return Gate(TOFFOLI, (c1, c2, t))


def rel_toffoli(c1: QubitRef, c2: QubitRef, t: QubitRef, angle: float = math.pi / 2) -> Gate:
    """[P_c1 P_c2 X_t]^angle: a Toffoli up to the phase -i on the controlled block."""
    return Gate(REL_TOFFOLI, (c1, c2, t), angle)


def local(axis: str, q: QubitRef, angle: float) -> Gate:
    return Gate(LOCAL, (q,), angle, axis)


def genexp(tag: str, qubits: Sequence[QubitRef], angle: float) -> Gate:
    return Gate(GENEXP, tuple(qubits), angle, tag)


@dataclass(frozen=True)
class Circuit:
    num_register: int
    num_ancilla: int = 0
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for q in g.qubits:
                limit = self.num_register if q.role == REGISTER else self.num_ancilla
                if q.index >= limit:
                    raise ValueError(f"{g.kind} touches {q}, outside the declared {q.role} size {limit}")

    @property
    def width(self) -> int:
        return self.num_register + self.num_ancilla

    def flat_index(self, q: QubitRef) -> int:
        """Tensor slot of ``q``: register first, ancillas in the trailing slots."""
        return q.index if q.role == REGISTER else self.num_register + q.index

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.num_register, self.num_ancilla, self.gates + tuple(gates))

    def inverse(self) -> Circuit:
        return Circuit(self.num_register, self.num_ancilla, inverse_gates(self.gates))

    def __add__(self, other: Circuit) -> Circuit:
        if (self.num_register, self.num_ancilla) != (other.num_register, other.num_ancilla):
            raise ValueError("cannot concatenate circuits over different layouts")
        return self.extend(other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def without(self, position: int) -> Circuit:
        gates = list(self.gates)
        del gates[position]
        return Circuit(self.num_register, self.num_ancilla, gates)


_DIAGONAL_SYMBOLS = frozenset("IPNZ")


def _symbol_on(g: Gate, q: QubitRef) -> str | None:
    """Generator symbol acting on ``q`` when the tag has one single-qubit symbol per qubit."""
    i = g.qubits.index(q)
    if g.kind in (CNOT, TOFFOLI):
        return "P" if i < len(g.qubits) - 1 else "X"
    if g.generator is not None and len(g.generator) == len(g.qubits):
        return g.generator[i]
    return None


def drop_clean_controlled(c: Circuit) -> Circuit:
    """Remove gates controlled on an ancilla known to sit in |0>.

    Only valid when every ancilla starts in |0>.  Ancilla values are tracked
    through gates that are diagonal on them and through pi/2 X/Y flips.
    """
    known = {anc(i): 0 for i in range(c.num_ancilla)}
    kept: list[Gate] = []
    for g in c.gates:
        tracked = [q for q in g.qubits if q in known]
        if any(known[q] == 0 and _symbol_on(g, q) == "P" for q in tracked):
            continue
        for q in tracked:
            sym = _symbol_on(g, q)
            if sym in _DIAGONAL_SYMBOLS:
                continue
            if g.kind == LOCAL and sym in "XY" and abs(abs(g.angle) - math.pi / 2) < 1e-12:
                known[q] ^= 1
            else:
                del known[q]
        kept.append(g)
    return Circuit(c.num_register, c.num_ancilla, kept)


def inverse_gates(gates: Sequence[Gate]) -> tuple[Gate, ...]:
    return tuple(g.inverse() for g in reversed(gates))


def apply_gates(c: Circuit, states: np.ndarray) -> np.ndarray:
    """Evolve each column of ``states`` (shape (2**width, k)) through ``c``."""
    w = c.width
    k = states.shape[1]
    if states.shape[0] != 2**w:
        raise ValueError(f"state block has {states.shape[0]} rows, circuit needs {2**w}")
    psi = np.asarray(states, dtype=complex).reshape([2] * w + [k])
    for g in c.gates:
        sites = [c.flat_index(q) for q in g.qubits]
        a = len(sites)
        m = g.matrix().reshape([2] * (2 * a))
        psi = np.tensordot(m, psi, axes=(list(range(a, 2 * a)), sites))
        # tensordot puts the gate's output axes first; restore qubit order
        psi = np.moveaxis(psi, list(range(a)), sites)
    return psi.reshape(2**w, k)


def _layer_count(c: Circuit, gates: Iterable[Gate]) -> int:
    last: dict[QubitRef, int] = {}
    depth = 0
    for g in gates:
        layer = 1 + max((last.get(q, 0) for q in g.qubits), default=0)
        for q in g.qubits:
            last[q] = layer
        depth = max(depth, layer)
    return depth


def depth(c: Circuit) -> int:
    """Greedy left-to-right layering in which every gate occupies a slot."""
    return _layer_count(c, c.gates)


def entangler_depth(c: Circuit) -> int:
    """Layer count of multi-qubit gates alone; single-qubit gates merge into neighbours."""
    return _layer_count(c, (g for g in c.gates if g.is_entangler))


@dataclass(frozen=True)
class ResourceReport:
    counts_by_kind: dict[str, int]
    depth: int
    entangler_depth: int
    width: int
    ancillas: int
    generator_counts: dict[str, int] = field(default_factory=dict)

    @property
    def entanglers(self) -> int:
        return sum(n for k, n in self.counts_by_kind.items() if k != LOCAL)

    def count(self, kind: str) -> int:
        return self.counts_by_kind.get(kind, 0)

    def to_dict(self) -> dict:
        return {
            "countsByKind": dict(sorted(self.counts_by_kind.items())),
            "generatorCounts": dict(sorted(self.generator_counts.items())),
            "depth": self.depth,
            "entanglerDepth": self.entangler_depth,
            "width": self.width,
            "ancillas": self.ancillas,
        }


def resource_report(c: Circuit) -> ResourceReport:
    counts = Counter(g.kind for g in c.gates)
    gens = Counter(g.generator for g in c.gates if g.kind in (GENEXP, SUPPORT_CX))
    return ResourceReport(dict(counts), depth(c), entangler_depth(c), c.width, c.num_ancilla, dict(gens))


# --- serialization -------------------------------------------------------


def to_dict(c: Circuit) -> dict:
    return {
        "numRegister": c.num_register,
        "numAncilla": c.num_ancilla,
        "gates": [
            {
                "kind": g.kind,
                "qubits": [{"role": q.role, "index": q.index} for q in g.qubits],
                "angle": g.angle,
                "generatorTag": g.generator,
            }
            for g in c.gates
        ],
    }


def from_dict(data: dict) -> Circuit:
    try:
        gates = [
            Gate(
                g["kind"],
                tuple(QubitRef(q["role"], int(q["index"])) for q in g["qubits"]),
                g.get("angle"),
                g.get("generatorTag"),
            )
            for g in data["gates"]
        ]
        return Circuit(int(data["numRegister"]), int(data.get("numAncilla", 0)), gates)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed circuit document: {exc}") from exc


def to_json(c: Circuit, indent: int | None = 2) -> str:
    return json.dumps(to_dict(c), indent=indent)


def from_json(text: str) -> Circuit:
    return from_dict(json.loads(text))


_QASM_AXIS = {"X": "rx", "Y": "ry", "Z": "rz"}


def _qasm_name(g: Gate) -> str:
    if g.kind == CNOT:
        return "cx"
    if g.kind == TOFFOLI:
        return "ccx"
    if g.kind == REL_TOFFOLI:
        return "rccx_phase"
    if g.kind == ISWAP:
        return "xy_exchange"
    if g.kind == MSG:
        return "rxx_ms"
    if g.kind == LOCAL:
        return _QASM_AXIS.get(g.generator, f"rot_{g.generator}")
    if g.kind == GENEXP:
        return f"genexp_{g.generator}"
    if g.kind == SUPPORT_CX:
        return f"scx_{g.generator}"
    raise ValueError(f"no QASM template for {g.kind}")


def export(c: Circuit, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(c)
    if fmt == "qasm":
        return to_qasm(c)
    raise ValueError(f"unsupported export format {fmt!r}")


def to_qasm(c: Circuit) -> str:
    """OpenQASM 2.0 text.  Non-standard kinds become opaque gates of (theta)."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    opaque: dict[str, int] = {}
    body = []
    for g in c.gates:
        name = _qasm_name(g)
        args = ",".join(str(q) for q in g.qubits)
        if g.kind in (CNOT, TOFFOLI):
            body.append(f"{name} {args};")
            continue
        if g.kind == LOCAL and g.generator in _QASM_AXIS:
            # exp(-i a X) = rx(2a)
            body.append(f"{name}({2 * g.angle!r}) {args};")
            continue
        opaque[name] = g.arity
        body.append(f"{name}({g.angle!r}) {args};")
    for name, arity in sorted(opaque.items()):
        params = ",".join(f"a{i}" for i in range(arity))
        lines.append(f"opaque {name}(theta) {params};")
    lines.append(f"qreg q[{c.num_register}];")
    if c.num_ancilla:
        lines.append(f"qreg anc[{c.num_ancilla}];")
    lines.extend(body)
    return "\n".join(lines) + "\n"
