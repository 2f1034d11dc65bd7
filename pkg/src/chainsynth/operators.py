"""Hermitian site factors and their support/kernel split.

Every factor used here squares to its own support projector, so its
exponential has the cheap closed form in :func:`chainsynth.linalg.expm_generator`.

Generators of multi-qubit gates are written as *tags*: strings of factor
symbols, one symbol per factor, read left to right over the gate's qubits.
Two-qubit symbols (G, F, K, L) consume two qubits.  ``"ZG"`` is therefore
Z on the first qubit times the exchange operator on the next two.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg as la
from .linalg import I2, P0, P1, SIGMA_MINUS, SIGMA_PLUS, X, Y, Z

DEFAULT_RANK_TOL = 1e-9

_G = la.tensor(SIGMA_PLUS, SIGMA_MINUS) + la.tensor(SIGMA_MINUS, SIGMA_PLUS)
_F = -1j * (la.tensor(SIGMA_PLUS, SIGMA_MINUS) - la.tensor(SIGMA_MINUS, SIGMA_PLUS))
_ZZ = la.tensor(Z, Z)

SYMBOLS: dict[str, np.ndarray] = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "P": P1,
    "N": P0,
    "H": (X + Z) / np.sqrt(2),
    "G": _G,
    "F": _F,
    # support and kernel projectors of G
    "K": (np.eye(4) - _ZZ) / 2,
    "L": (np.eye(4) + _ZZ) / 2,
}
SYMBOL_ARITY = {s: la.num_qubits_of(m) for s, m in SYMBOLS.items()}

FACTOR_KINDS = ("X", "Y", "Z", "P", "N", "H", "G", "F", "K", "L", "sigma_plus_string_end")


@dataclass(frozen=True, eq=False)
class HermitianFactor:
    """A site-local Hermitian operator R split into support part S and kernel."""

    label: str
    matrixR: np.ndarray
    matrixS: np.ndarray
    pSupp: np.ndarray
    pKer: np.ndarray

    @property
    def arity(self) -> int:
        return la.num_qubits_of(self.matrixR)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.pSupp).real))

    @property
    def full_rank(self) -> bool:
        return self.rank == self.matrixR.shape[0]

    @property
    def matrixS_perp(self) -> np.ndarray:
        """Part of R living in the kernel of S (zero for every built-in factor)."""
        return self.matrixR - self.matrixS

    def invariant_defect(self) -> float:
        """Largest violation of the projector and squaring identities."""
        eye = np.eye(self.matrixR.shape[0])
        s, ps, pk = self.matrixS, self.pSupp, self.pKer
        checks = [
            ps + pk - eye,
            ps @ pk,
            ps @ ps - ps,
            pk @ pk - pk,
            s @ pk,
            s @ s - ps,
        ]
        return float(max(np.abs(c).max() for c in checks))


def support_decompose(r: np.ndarray, tol: float = DEFAULT_RANK_TOL, label: str = "") -> HermitianFactor:
    """Split Hermitian ``r`` by eigenvalue magnitude: |lambda| <= tol is kernel."""
    r = np.asarray(r, dtype=complex)
    defect = la.hermitian_defect(r)
    if defect > la.HERMITIAN_TOL:
        raise ValueError(f"factor is not Hermitian (max |R - R^dag| = {defect:.3e})")
    w, v = np.linalg.eigh(r)
    keep = np.abs(w) > tol
    p_supp = v[:, keep] @ v[:, keep].conj().T
    p_ker = v[:, ~keep] @ v[:, ~keep].conj().T
    s = p_supp @ r @ p_supp
    return HermitianFactor(label or "custom", r, s, p_supp, p_ker)


@lru_cache(maxsize=None)
def make_factor(kind: str) -> HermitianFactor:
    """Canonical factor for ``kind``; ``sigma_plus_string_end`` is sigma+ + sigma- = X."""
    if kind == "sigma_plus_string_end":
        return support_decompose(SIGMA_PLUS + SIGMA_MINUS, label=kind)
    if kind not in SYMBOLS:
        raise ValueError(f"unknown factor kind {kind!r}; expected one of {FACTOR_KINDS}")
    return support_decompose(SYMBOLS[kind], label=kind)


def tag_arity(tag: str) -> int:
    try:
        return sum(SYMBOL_ARITY[c] for c in tag)
    except KeyError as exc:
        raise ValueError(f"unknown symbol {exc.args[0]!r} in generator tag {tag!r}") from None


@lru_cache(maxsize=256)
def _tag_matrix_cached(tag: str) -> np.ndarray:
    m = la.tensor(*(SYMBOLS[c] for c in tag))
    m.setflags(write=False)
    return m


def tag_matrix(tag: str) -> np.ndarray:
    """Dense matrix of a generator tag on its own qubits."""
    tag_arity(tag)
    return _tag_matrix_cached(tag)


def chain_identity_residual(
    u: np.ndarray,
    r_i: HermitianFactor,
    r_j: HermitianFactor,
    s_i: np.ndarray | None = None,
    carrier: np.ndarray | None = None,
    sign: float = 1.0,
) -> float:
    """How far ``u`` is from extending the string ``R_i`` by ``R_j``.

    Measures u^dag (R_i x 1) u against
    sign * S_i x R_j + S_i_perp x 1 + C_i x Ker(R_j),
    where ``s_i`` overrides S_i with its stored local frame and ``carrier``
    (default S_i) is the operator multiplying the kernel projector of R_j.
    """
    s = r_i.matrixS if s_i is None else np.asarray(s_i)
    c = s if carrier is None else np.asarray(carrier)
    dim = r_i.matrixR.shape[0] * r_j.matrixR.shape[0]
    if u.shape != (dim, dim):
        raise ValueError(f"entangler of shape {u.shape} does not act on the joint space of dimension {dim}")
    lhs = u.conj().T @ np.kron(r_i.matrixR, np.eye(r_j.matrixR.shape[0])) @ u
    rhs = (
        sign * np.kron(s, r_j.matrixR)
        + np.kron(r_i.matrixS_perp, np.eye(r_j.matrixR.shape[0]))
        + np.kron(c, r_j.pKer)
    )
    return float(np.abs(lhs - rhs).max())
