import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsynth import linalg as la
from chainsynth.operators import (
    FACTOR_KINDS,
    SYMBOLS,
    chain_identity_residual,
    make_factor,
    support_decompose,
    tag_arity,
    tag_matrix,
)


@pytest.mark.parametrize("kind", FACTOR_KINDS)
def test_factor_invariants(kind):
    f = make_factor(kind)
    assert f.invariant_defect() < 1e-12
    # every built-in factor is its own support part
    assert np.abs(f.matrixS_perp).max() < 1e-12


def test_exchange_operator_frozen():
    # G = |01><10| + |10><01|
    g = np.zeros((4, 4))
    g[1, 2] = g[2, 1] = 1
    assert np.allclose(tag_matrix("G"), g)
    # F = i|01><10| - i|10><01|
    f = np.zeros((4, 4), dtype=complex)
    f[1, 2], f[2, 1] = 1j, -1j
    assert np.allclose(tag_matrix("F"), f)


@pytest.mark.parametrize("kind, rank", [("X", 2), ("P", 1), ("N", 1), ("G", 2), ("F", 2), ("K", 2), ("L", 2)])
def test_factor_ranks(kind, rank):
    f = make_factor(kind)
    assert f.rank == rank
    assert f.full_rank == (rank == f.matrixR.shape[0])


def test_sigma_plus_string_end_is_x():
    assert np.allclose(make_factor("sigma_plus_string_end").matrixR, la.X)


def test_unknown_factor_kind():
    with pytest.raises(ValueError, match="unknown factor kind"):
        make_factor("Q")


def test_tag_arity_and_matrix():
    assert tag_arity("ZG") == 3
    assert np.allclose(tag_matrix("ZG"), np.kron(la.Z, tag_matrix("G")))
    with pytest.raises(ValueError, match="unknown symbol"):
        tag_arity("ZQ")


@given(st.lists(st.sampled_from(sorted(SYMBOLS)), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_tag_matrix_hermitian(tag):
    m = tag_matrix("".join(tag))
    assert la.hermitian_defect(m) == 0.0


def test_support_decompose_random_diagonal():
    f = support_decompose(np.diag([2.0, 0.0, -1.0, 0.0]))
    assert f.rank == 2
    assert f.invariant_defect() > 0.5  # S^2 != P_supp when |eigenvalues| != 1


def test_chain_identity_cnot_extends_z():
    # CNOT with control on the new site: CX (Z x 1) CX = Z x Z
    cx = np.eye(4)[[0, 3, 2, 1]]
    z = make_factor("Z")
    assert chain_identity_residual(cx, z, z) < 1e-15


def test_chain_identity_shape_check():
    with pytest.raises(ValueError):
        chain_identity_residual(np.eye(2), make_factor("Z"), make_factor("Z"))
