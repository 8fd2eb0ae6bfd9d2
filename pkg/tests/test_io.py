import json

import numpy as np
import pytest

from tomosim import io
from tomosim.errors import InputError, InvalidChannel, InvalidMode
from tomosim.fermions import FermionOperator
from tomosim.polyfactor import MultilinearPolynomial, factorize_fully
from tomosim.robustness import amplitude_damping, dephasing
from tomosim.statecore import Circuit, PauliStringHamiltonian, circuit_unitary, exact_propagator
from tomosim.tomography import reconstruct_rdm

BELL = {"dims": [2, 2], "gates": [{"name": "H", "sites": [0]}, {"name": "CNOT", "sites": [0, 1]}]}


def test_complex_and_matrix_codecs():
    assert io.decode_complex(2) == 2 + 0j
    assert io.decode_complex([1.5, -2]) == 1.5 - 2j
    with pytest.raises(InputError):
        io.decode_complex("1")
    with pytest.raises(InputError):
        io.decode_complex(True)
    m = np.array([[1, 1j], [-1j, 2]])
    assert np.array_equal(io.decode_matrix(io.encode_matrix(m)), m)
    with pytest.raises(InputError):
        io.decode_matrix([[1, 2], [3]])


def test_read_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(InputError):
        io.read_json(bad)
    with pytest.raises(InputError):
        io.read_json(tmp_path / "missing.json")


def test_dumps_is_sorted_and_numpy_safe():
    text = io.dumps({"b": np.float64(1.5), "a": np.int64(2), "c": np.array([1, 2]), "d": np.bool_(True)})
    assert text == '{\n  "a": 2,\n  "b": 1.5,\n  "c": [\n    1,\n    2\n  ],\n  "d": true\n}\n'
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


def test_circuit_roundtrip():
    circ = io.load_circuit(BELL)
    again = io.load_circuit(json.loads(io.dumps(io.dump_circuit(circ))))
    assert np.allclose(circuit_unitary(circ), circuit_unitary(again))
    custom = Circuit((2,), [(np.array([[0, 1], [1, 0]]), (0,))])
    back = io.load_circuit(io.dump_circuit(custom))
    assert np.allclose(back.gates[0].matrix, [[0, 1], [1, 0]])
    with pytest.raises(InputError):
        io.load_circuit({"dims": [2], "gates": [{"sites": [0]}]})
    with pytest.raises(InputError):
        io.load_circuit({"gates": []})


def test_program_kinds():
    psi, kind = io.load_program(BELL)
    assert kind == "circuit" and np.allclose(psi.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    psi, kind = io.load_program({"dims": [2], "amplitudes": [[0, 1], 0]})
    assert kind == "state" and np.allclose(psi.amplitudes, [1j, 0])
    ham = {"dims": [2, 2], "terms": [{"coeff": 0.5, "paulis": "XX"}, {"coeff": 0.3, "paulis": "ZI"}]}
    h = io.load_hamiltonian(ham)
    for sign in (1, -1):
        psi, kind = io.load_program(ham, time=0.8, steps=0, sign=sign)
        ref = exact_propagator(h, 0.8, sign)[:, 0]
        assert kind == "hamiltonian" and np.allclose(psi.amplitudes, ref)
        trotter, _ = io.load_program(ham, time=0.8, steps=400, sign=sign)
        assert np.linalg.norm(trotter.amplitudes - ref) < 1e-3
    with pytest.raises(InputError):
        io.load_program({"dims": [2]})
    with pytest.raises(InputError):
        io.load_program([1, 2])


def test_hamiltonian_roundtrip():
    h = PauliStringHamiltonian.from_strings((2, 2), [(0.5, "XX"), (-1.0, "ZI")])
    again = io.load_hamiltonian(io.dump_hamiltonian(h))
    assert again.terms == h.terms
    with pytest.raises(InputError):
        io.load_hamiltonian({"dims": [2], "terms": [{"coeff": "a", "paulis": "X"}]})


def test_observable_forms():
    obs = io.load_observable({"dims": [2, 2], "terms": [{"sites": [0, 1], "paulis": "ZZ", "coeff": 2},
                                                        {"sites": [1], "matrix": [[1, 0], [0, -1]]}]})
    assert np.allclose(obs.terms[0][1], 2 * np.diag([1, -1, -1, 1]))
    again = io.load_observable(io.dump_observable(obs))
    assert all(np.allclose(a[1], b[1]) for a, b in zip(obs.terms, again.terms))
    with pytest.raises(InputError):
        io.load_observable({"dims": [2], "terms": [{"sites": [3], "paulis": "Z"}]})


def test_channel_forms():
    ch = io.load_channel("dephasing:0.3")
    assert np.allclose(sum(np.kron(a, a.conj()) for a in ch.operators),
                       sum(np.kron(a, a.conj()) for a in dephasing(0.3).operators))
    assert io.load_channel({"name": "identity"}).dim == 2
    explicit = io.load_channel(io.dump_channel(amplitude_damping(0.2)))
    assert len(explicit.operators) == 2
    with pytest.raises(InputError):
        io.load_channel("nosuch:0.1")
    with pytest.raises(InputError):
        io.load_channel("bitflip")
    with pytest.raises(InvalidChannel):
        io.load_channel({"dim": 2, "kraus": [[[0.5, 0], [0, 0.5]]]})
    with pytest.raises(InputError):
        io.load_channel({"dim": 3, "kraus": [[[1, 0], [0, 1]]]})


def test_fermion_roundtrip():
    op = FermionOperator(3, ((0.5j, ((0, True), (2, False))),))
    again = io.load_fermion_operator(json.loads(io.dumps(io.dump_fermion_operator(op))))
    assert again == op
    with pytest.raises(InvalidMode):
        io.load_fermion_operator({"modes": 2, "terms": [{"ops": [{"mode": 2, "dag": True}]}]})


def test_polynomial_and_factor_report():
    doc = {"n": 2, "monomials": [{"symbols": "xy", "coeff": [1, 0]}, {"symbols": "yy", "coeff": 1}]}
    p = io.load_polynomial(doc)
    assert p == MultilinearPolynomial.from_monomials((2, 2), {"xy": 1, "yy": 1})
    assert io.load_polynomial(io.dump_polynomial(p)) == p
    rep = io.dump_factor_report(factorize_fully(p))
    assert [f["site"] for f in rep["factors"]] == [0, 1]
    assert rep["steps"][0]["residual"]["monomials"] == [{"symbols": "y", "coeff": [pytest.approx(np.sqrt(2)), 0.0]}]
    assert rep["fully_factored"] is True
    json.loads(io.dumps(rep))
    with pytest.raises(InputError):
        io.load_polynomial({"n": 3, "dims": [2, 2], "monomials": []})


def test_tomography_report_layout():
    psi, _ = io.load_program(BELL)
    est = reconstruct_rdm(psi, (0, 1), shots=100, seed=1)
    doc = io.dump_tomography(est)
    assert set(doc) == {"sites", "moments", "rho_hat", "shots"}
    assert doc["moments"][0].keys() == {"label", "est", "stderr"}
    assert np.asarray(doc["rho_hat"]).shape == (4, 4, 2)
