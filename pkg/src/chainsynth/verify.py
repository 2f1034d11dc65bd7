"""Brute-force dense verification of circuits against directly built targets."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg as la
from .circuit import Circuit, apply_gates
from .families import FamilySpec, multicontrol_matrix, synthesize, target_hamiltonian
from .operators import tag_matrix

CIRCUIT_QUBIT_CAP = 14
TARGET_QUBIT_CAP = 12
# block verification streams columns, so it tolerates wider circuits
BLOCK_QUBIT_CAP = 20
DEFAULT_TOL = 1e-9
LEAKAGE_TOL = 1e-10
IDENTITY_TOL = 1e-12


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c``; the first gate acts first."""
    if c.width > CIRCUIT_QUBIT_CAP:
        raise ValueError(f"circuit has {c.width} qubits; dense unitaries are capped at {CIRCUIT_QUBIT_CAP}")
    return apply_gates(c, np.eye(2**c.width, dtype=complex))


def target_unitary(spec: FamilySpec) -> np.ndarray:
    """Register-only target: exp(-i * factor * alpha * H_bar), or the exact gate for mcx X/Z."""
    if spec.num_register > TARGET_QUBIT_CAP:
        raise ValueError(f"target has {spec.num_register} qubits; capped at {TARGET_QUBIT_CAP}")
    if spec.family == "mcx" and spec.target != "rotation":
        return multicontrol_matrix(spec.n_controls, spec.target)
    return la.expm_generator(target_hamiltonian(spec), spec.angle_factor * spec.alpha)


@dataclass(frozen=True)
class VerificationResult:
    distance: float
    ancilla_preserved: bool
    subspace_leakage: float
    passed: bool
    tol: float = DEFAULT_TOL

    def to_dict(self) -> dict:
        return asdict(self)


def register_block(c: Circuit, ancilla_state: int = 0, chunk: int = 64) -> tuple[np.ndarray, float]:
    """Sub-block of the unitary with ancillas fixed to ``ancilla_state`` on both sides, plus leakage.

    Leakage is the largest amplitude that leaves the fixed-ancilla subspace.
    """
    if c.width > BLOCK_QUBIT_CAP:
        raise ValueError(f"circuit has {c.width} qubits; block verification is capped at {BLOCK_QUBIT_CAP}")
    dim_r = 2**c.num_register
    stride = 2**c.num_ancilla
    rows = np.arange(dim_r) * stride + ancilla_state
    mask = np.ones(2**c.width, dtype=bool)
    mask[rows] = False
    block = np.empty((dim_r, dim_r), dtype=complex)
    leakage = 0.0
    for start in range(0, dim_r, chunk):
        cols = np.arange(start, min(start + chunk, dim_r))
        states = np.zeros((2**c.width, len(cols)), dtype=complex)
        states[rows[cols], np.arange(len(cols))] = 1.0
        out = apply_gates(c, states)
        block[:, cols] = out[rows]
        if c.num_ancilla:
            leakage = max(leakage, float(np.abs(out[mask]).max()))
    return block, leakage


def verify_equivalence(c: Circuit, target: np.ndarray, tol: float = DEFAULT_TOL,
                       leakage_tol: float = LEAKAGE_TOL) -> VerificationResult:
    """Compare ``c`` (ancillas starting in |0>) with a register-only target, up to global phase."""
    if target.shape != (2**c.num_register,) * 2:
        raise ValueError(f"target of shape {target.shape} does not act on {c.num_register} register qubits")
    block, leakage = register_block(c)
    distance = la.phase_distance(block, target)
    preserved = leakage <= leakage_tol
    passed = distance <= tol and (preserved or c.num_ancilla == 0)
    return VerificationResult(distance, preserved, leakage, passed, tol)


def diagonal_defect(block: np.ndarray, target: np.ndarray) -> float:
    """How far block @ target^dag is from a diagonal unitary."""
    ratio = block @ target.conj().T
    off = ratio - np.diag(np.diag(ratio))
    return float(max(np.abs(off).max(), np.abs(np.abs(np.diag(ratio)) - 1).max()))


def verify_family(spec: FamilySpec, c: Circuit | None = None, tol: float = DEFAULT_TOL) -> VerificationResult:
    """Verify a family circuit against its target.

    Relative-phase multi-control gates are compared up to a diagonal; decoupled
    multi-control X/Z gates are checked as target x identity on the ancilla.
    """
    c = synthesize(spec) if c is None else c
    target = target_unitary(spec)
    phase_gate = spec.family == "mcx" and spec.target != "rotation"
    relative = phase_gate and spec.phase_mode == "relative"
    if phase_gate and spec.protocol == "decoupling":
        # decoupled multi-control X/Z gates promise target x identity on a dirty ancilla
        target = np.kron(target, np.eye(2**c.num_ancilla))
        full = circuit_unitary(c)
        distance = diagonal_defect(full, target) if relative else la.phase_distance(full, target)
        leakage = 0.0
    else:
        block, leakage = register_block(c)
        distance = diagonal_defect(block, target) if relative else la.phase_distance(block, target)
    preserved = leakage <= LEAKAGE_TOL
    passed = distance <= tol and (preserved or c.num_ancilla == 0)
    return VerificationResult(distance, preserved, leakage, passed, tol)


# --- identity suite ------------------------------------------------------


def _ops(tag: str, sites, total: int) -> np.ndarray:
    return la.embed(tag_matrix(tag), list(sites), total)


def _rot(tag: str, sites, total: int, angle: float) -> np.ndarray:
    return la.expm_generator(_ops(tag, sites, total), angle)


def _conj(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """u^dag a u."""
    return u.conj().T @ a @ u


def _random_factor(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Hermitian S with S^2 = P_supp: random basis, eigenvalues drawn from {-1, 0, +1}."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(z)
    eig = rng.choice([-1.0, 0.0, 1.0], size=dim)
    if not eig.any():
        eig[0] = 1.0
    return (q * eig) @ q.conj().T


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (z + z.conj().T) / 2


def transformation_rule(s: np.ndarray, b: np.ndarray, r: np.ndarray, alpha: float) -> np.ndarray:
    """Closed form of [S_i B_j]^alpha R_i [S_i B_j]^-alpha via support/kernel projectors."""
    ps = la.support_projector(s)
    pk = np.eye(len(s)) - ps
    pbs = la.support_projector(b)
    pbk = np.eye(len(b)) - pbs
    c, sn = math.cos(alpha), math.sin(alpha)
    out = np.kron(r, pbk)
    out += np.kron(pk @ r @ pk, pbs)
    out += c * np.kron(pk @ r @ ps, pbs)
    out += c * np.kron(ps @ r @ pk, pbs)
    out += c * c * np.kron(ps @ r @ ps, pbs)
    out += sn * sn * np.kron(s @ r @ s, pbs)
    out += -1j * sn * np.kron(s @ r @ pk - pk @ r @ s, b)
    out += -1j * c * sn * np.kron(s @ r @ ps - ps @ r @ s, b)
    return out


def transformation_residual(s: np.ndarray, b: np.ndarray, r: np.ndarray, alpha: float) -> float:
    u = la.expm_generator(np.kron(s, b), alpha)
    direct = u @ np.kron(r, np.eye(len(b))) @ u.conj().T
    return float(np.abs(direct - transformation_rule(s, b, r, alpha)).max())


@dataclass
class IdentityReport:
    residuals: dict[str, float] = field(default_factory=dict)
    runtime: float = 0.0
    tol: float = IDENTITY_TOL

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "passed": self.passed, "runtime": self.runtime, "tol": self.tol}


def identity_residuals() -> dict[str, float]:
    res: dict[str, float] = {}
    q4 = math.pi / 4
    q2 = math.pi / 2
    # XX chaining of Y
    res["xx_chain_y"] = float(np.abs(_conj(_rot("XX", [0, 1], 2, q4), _ops("Y", [0], 2)) + _ops("ZX", [0, 1], 2)).max())
    # CNOT chaining of Z (control on the new site)
    cx = np.eye(4)[[0, 3, 2, 1]]  # control qubit 1, target qubit 0
    res["cnot_chain_z"] = float(np.abs(cx @ _ops("Z", [0], 2) @ cx - _ops("ZZ", [0, 1], 2)).max())
    # iSWAP chaining of Y
    res["iswap_chain_y"] = float(np.abs(_conj(_rot("G", [0, 1], 2, q2), _ops("Y", [0], 2)) + _ops("ZX", [0, 1], 2)).max())
    # exchange chaining of G and F
    u = _rot("ZG", [0, 2, 3], 4, q4)
    res["exchange_chain_g"] = float(
        np.abs(_conj(u, _ops("G", [0, 1], 4)) - (_ops("GL", [0, 1, 2, 3], 4) + _ops("FG", [0, 1, 2, 3], 4))).max()
    )
    res["exchange_chain_f"] = float(
        np.abs(u @ _ops("F", [0, 1], 4) @ u.conj().T - (_ops("FL", [0, 1, 2, 3], 4) + _ops("GG", [0, 1, 2, 3], 4))).max()
    )
    # [Z_i G_kl]^a from exchange rotations on (i,l) and (i,k), qubits i=0, k=1, l=2
    a = 0.37
    f = _rot("F", [0, 2], 3, q2)
    res["exchange_generator"] = float(
        np.abs(f @ _rot("G", [0, 1], 3, a) @ f.conj().T - _rot("ZG", [0, 1, 2], 3, a)).max()
    )
    # relative-phase Toffoli chaining of ZZ
    t = _rot("PXP", [0, 1, 2], 3, q2)
    res["toffoli_chain_zz"] = float(
        np.abs(_conj(t, _ops("ZZ", [0, 1], 3)) - (-_ops("PZZ", [0, 1, 2], 3) + _ops("NZ", [0, 1], 3))).max()
    )
    # transformation rule: alpha = 0 and randomized instances
    rng = np.random.default_rng(20240611)
    s, b, r = _random_factor(rng, 2), _random_factor(rng, 2), _random_hermitian(rng, 2)
    res["transformation_alpha0"] = transformation_residual(s, b, r, 0.0)
    worst = 0.0
    for _ in range(25):
        di, dj = rng.choice([2, 4]), rng.choice([2, 4])
        s, b, r = _random_factor(rng, di), _random_factor(rng, dj), _random_hermitian(rng, di)
        worst = max(worst, transformation_residual(s, b, r, rng.uniform(-math.pi, math.pi)))
    res["transformation_random"] = worst
    return res


def verify_identity_suite() -> IdentityReport:
    start = time.perf_counter()
    res = identity_residuals()
    return IdentityReport(res, time.perf_counter() - start)
