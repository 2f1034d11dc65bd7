import json
import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsynth import linalg as la
from chainsynth.circuit import (
    CNOT,
    GENEXP,
    ISWAP,
    LOCAL,
    MSG,
    REL_TOFFOLI,
    Circuit,
    Gate,
    QubitRef,
    anc,
    cnot,
    depth,
    drop_clean_controlled,
    entangler_depth,
    export,
    from_dict,
    from_json,
    genexp,
    local,
    reg,
    rel_toffoli,
    resource_report,
    to_json,
    to_qasm,
    toffoli,
)
from chainsynth.operators import tag_matrix
from chainsynth.verify import circuit_unitary


def test_cnot_matrix_control_first():
    u = circuit_unitary(Circuit(2, 0, [cnot(reg(0), reg(1))]))
    assert np.allclose(u, np.eye(4)[[0, 1, 3, 2]])


def test_reversed_cnot_via_qubit_order():
    u = circuit_unitary(Circuit(2, 0, [cnot(reg(1), reg(0))]))
    assert np.allclose(u, np.eye(4)[[0, 3, 2, 1]])


def test_first_gate_acts_first():
    a, b = local("X", reg(0), 0.3), local("Z", reg(0), 0.5)
    u = circuit_unitary(Circuit(1, 0, [a, b]))
    assert np.allclose(u, b.matrix() @ a.matrix())


def test_rel_toffoli_is_toffoli_up_to_phase():
    u = circuit_unitary(Circuit(3, 0, [rel_toffoli(reg(0), reg(1), reg(2))]))
    t = circuit_unitary(Circuit(3, 0, [toffoli(reg(0), reg(1), reg(2))]))
    # [PPX]^(pi/2) = Toffoli with -i on the controlled block
    assert np.allclose(u, t @ np.diag([1] * 6 + [-1j] * 2))


def test_ancillas_occupy_trailing_slots():
    c = Circuit(2, 1, [local("X", anc(0), math.pi / 2)])
    assert c.flat_index(anc(0)) == 2
    assert np.allclose(circuit_unitary(c), np.kron(np.eye(4), -1j * la.X))


def test_implicit_generators_and_defaults():
    assert Gate(REL_TOFFOLI, (reg(0), reg(1), reg(2))).generator == "PPX"
    assert Gate(ISWAP, (reg(0), reg(1))).angle == pytest.approx(math.pi / 2)
    assert Gate(MSG, (reg(0), reg(1))).generator == "XX"


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(kind="Nope", qubits=(reg(0),)), "unknown gate kind"),
        (dict(kind=CNOT, qubits=(reg(0), reg(0))), "repeated"),
        (dict(kind=CNOT, qubits=(reg(0),)), "expects 2"),
        (dict(kind=GENEXP, qubits=(reg(0),), angle=0.1), "needs a generator"),
        (dict(kind=LOCAL, qubits=(reg(0),), generator="X"), "needs an angle"),
    ],
)
def test_gate_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        Gate(**kwargs)


def test_circuit_rejects_out_of_range_qubit():
    with pytest.raises(ValueError, match="outside"):
        Circuit(1, 0, [cnot(reg(0), reg(1))])


def test_qubitref_validation():
    with pytest.raises(ValueError):
        QubitRef("data", 0)
    with pytest.raises(ValueError):
        QubitRef("register", -1)


gate_strategy = st.one_of(
    st.builds(lambda a, q, t: local(a, reg(q), t), st.sampled_from("XYZH"), st.integers(0, 2), st.floats(-3, 3)),
    st.builds(lambda p: cnot(reg(p[0]), reg(p[1])), st.permutations([0, 1, 2]).map(lambda p: p[:2])),
    st.builds(lambda p, t: genexp("ZG", [reg(i) for i in p], t), st.permutations([0, 1, 2]), st.floats(-3, 3)),
    st.builds(lambda p: rel_toffoli(*(reg(i) for i in p)), st.permutations([0, 1, 2])),
)


@given(st.lists(gate_strategy, max_size=8))
@settings(max_examples=40, deadline=None)
def test_inverse_circuit_undoes(gates):
    c = Circuit(3, 0, gates)
    assert np.allclose(circuit_unitary(c + c.inverse()), np.eye(8), atol=1e-12)


@given(st.lists(gate_strategy, max_size=8))
@settings(max_examples=40, deadline=None)
def test_json_round_trip(gates):
    c = Circuit(3, 0, gates)
    back = from_json(to_json(c))
    assert back == c


@given(st.lists(gate_strategy, min_size=1, max_size=6))
@settings(max_examples=30, deadline=None)
def test_unitary_matches_kron_oracle(gates):
    expected = np.eye(8, dtype=complex)
    for g in gates:
        idx = [q.index for q in g.qubits]
        expected = la.embed(g.matrix(), idx, 3) @ expected
    assert np.allclose(circuit_unitary(Circuit(3, 0, gates)), expected, atol=1e-12)


def test_genexp_matches_scipy():
    g = genexp("ZG", [reg(0), reg(1), reg(2)], 0.37)
    assert np.allclose(g.matrix(), sl.expm(-0.37j * tag_matrix("ZG")))


def test_json_schema_keys():
    doc = json.loads(to_json(Circuit(1, 1, [cnot(reg(0), anc(0))])))
    assert set(doc) == {"numRegister", "numAncilla", "gates"}
    assert doc["gates"][0] == {
        "kind": "CNOT",
        "qubits": [{"role": "register", "index": 0}, {"role": "ancilla", "index": 0}],
        "angle": None,
        "generatorTag": None,
    }


def test_malformed_json():
    with pytest.raises(ValueError, match="malformed"):
        from_dict({"gates": []})


def test_qasm_frozen():
    c = Circuit(2, 1, [local("X", reg(0), 0.25), cnot(reg(0), reg(1)), rel_toffoli(reg(0), reg(1), anc(0))])
    assert to_qasm(c) == (
        "OPENQASM 2.0;\n"
        'include "qelib1.inc";\n'
        "opaque rccx_phase(theta) a0,a1,a2;\n"
        "qreg q[2];\n"
        "qreg anc[1];\n"
        "rx(0.5) q[0];\n"
        "cx q[0],q[1];\n"
        f"rccx_phase({math.pi / 2!r}) q[0],q[1],anc[0];\n"
    )


def test_export_rejects_unknown_format():
    with pytest.raises(ValueError):
        export(Circuit(1), "quil")


def test_depth_and_report():
    c = Circuit(3, 0, [local("X", reg(0), 0.1), cnot(reg(0), reg(1)), local("Z", reg(2), 0.1), cnot(reg(1), reg(2))])
    assert depth(c) == 3
    assert entangler_depth(c) == 2
    r = resource_report(c)
    assert r.count(CNOT) == 2 and r.entanglers == 2 and r.width == 3
    assert r.to_dict()["countsByKind"] == {"CNOT": 2, "LocalRot": 2}


def test_without_removes_one_gate():
    c = Circuit(2, 0, [cnot(reg(0), reg(1)), local("X", reg(0), 0.1)])
    assert c.without(0).gates == (local("X", reg(0), 0.1),)


def test_drop_clean_controlled_removes_inert_gates():
    live = rel_toffoli(reg(0), reg(1), anc(0))
    inert = rel_toffoli(reg(0), anc(0), reg(1))
    flip = local("X", anc(0), math.pi / 2)
    c = Circuit(2, 1, [inert, live, flip, inert])
    # the first control on anc(0) is |0>, so the gate is dropped; after the live target hit
    # the ancilla is no longer known and nothing else is removed
    assert drop_clean_controlled(c).gates == (live, flip, inert)
    c2 = Circuit(2, 1, [inert, flip, inert, flip, inert])
    assert drop_clean_controlled(c2).gates == (flip, inert, flip)
