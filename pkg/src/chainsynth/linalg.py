"""Dense matrix helpers shared by every other module.

Qubit 0 is the slowest-varying (leftmost) tensor factor throughout.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |1><1| and |0><0|
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
# raising operator (X - iY)/2 = |1><0|
SIGMA_PLUS = (X - 1j * Y) / 2
SIGMA_MINUS = (X + 1j * Y) / 2


def identity(num_qubits: int) -> np.ndarray:
    return np.eye(2**num_qubits, dtype=complex)


def num_qubits_of(a: np.ndarray) -> int:
    dim = a.shape[0]
    k = dim.bit_length() - 1
    if a.ndim != 2 or a.shape[0] != a.shape[1] or 1 << k != dim:
        raise ValueError(f"expected a square matrix with power-of-two dimension, got {a.shape}")
    return k


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor indexes the slowest-varying qubit."""
    if not factors:
        return np.eye(1, dtype=complex)
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.abs(a - a.conj().T).max()) if a.size else 0.0


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol)


def support_projector(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    keep = np.abs(w) > tol
    return v[:, keep] @ v[:, keep].conj().T


def expm_generator(a: np.ndarray, alpha: float) -> np.ndarray:
    """Return exp(-i*alpha*a) for Hermitian ``a``.

    Generators that square to their own support projector take the closed
    form P_ker + cos(alpha) P_supp - i sin(alpha) a; anything else goes
    through a Hermitian eigendecomposition.
    """
    a = np.asarray(a, dtype=complex)
    defect = hermitian_defect(a)
    if defect > HERMITIAN_TOL:
        raise ValueError(f"generator is not Hermitian (max |A - A^dag| = {defect:.3e})")
    sq = a @ a
    # A^2 is itself a projector exactly when A^2 = P_supp(A)
    if np.abs(sq @ sq - sq).max() <= 1e-12:
        p_supp = sq
        p_ker = np.eye(a.shape[0]) - p_supp
        return p_ker + np.cos(alpha) * p_supp - 1j * np.sin(alpha) * a
    return expm_eigh(a, alpha)


def expm_eigh(a: np.ndarray, alpha: float) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.exp(-1j * alpha * w)) @ v.conj().T


def embed(op: np.ndarray, sites: Sequence[int], total: int) -> np.ndarray:
    """Place ``op`` on ``sites`` (in listed order) of a ``total``-qubit register."""
    sites = list(sites)
    k = len(sites)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {op.shape} does not act on {k} qubits")
    if len(set(sites)) != k:
        raise ValueError(f"repeated site in {sites}")
    if any(s < 0 or s >= total for s in sites):
        raise ValueError(f"site out of range in {sites} for {total} qubits")
    rest = [q for q in range(total) if q not in sites]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = sites + rest
    if order == list(range(total)):
        return full
    # axes of `full` are labelled by `order`; move them back to 0..total-1
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * total))
    t = t.transpose(list(inv) + [total + i for i in inv])
    return t.reshape(2**total, 2**total)


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-entry distance between ``u`` and ``v`` after removing a global phase."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    idx = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[idx]) == 0:
        return float(np.abs(u).max())
    ratio = u[idx] / v[idx]
    phase = ratio / abs(ratio) if abs(ratio) > 0 else 1.0
    best = float(np.abs(u - phase * v).max())
    # refine over a coarse-to-fine phase scan around the aligned phase
    base = np.angle(phase)
    for width in (np.pi, 0.1, 1e-3, 1e-5, 1e-7):
        grid = base + np.linspace(-width, width, 41)
        dists = [np.abs(u - np.exp(1j * t) * v).max() for t in grid]
        k = int(np.argmin(dists))
        if dists[k] < best:
            best = float(dists[k])
            base = grid[k]
    return best


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
