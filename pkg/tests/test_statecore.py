import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from tomosim.errors import (
    InputError,
    InvalidDensityMatrix,
    InvalidDimension,
    InvalidLabel,
    InvalidSites,
    ShapeError,
    TooLarge,
)
from tomosim.statecore import (
    Circuit,
    DensityMatrix,
    PauliStringHamiltonian,
    PureState,
    RegisterShape,
    apply_circuit,
    basis_state,
    bloch_decompose,
    circuit_unitary,
    embed_operator,
    exact_propagator,
    format_labels,
    gellmann_basis,
    generalized_paulis,
    heisenberg_hamiltonian,
    label_matrix,
    named_gate,
    parse_labels,
    partial_trace,
    purity,
    random_circuit,
    random_density_matrix,
    random_state,
    run_circuit,
    trace_distance,
    trotterize,
    von_neumann_entropy,
)

X, Y, Z = (named_gate(p) for p in "XYZ")


def loop_partial_trace(rho, dims, keep):
    """Element-by-element reference reduction."""
    n = len(dims)
    rest = [s for s in range(n) if s not in keep]
    dk = int(np.prod([dims[s] for s in keep]))
    out = np.zeros((dk, dk), dtype=complex)
    full = rho.reshape(dims * 2)
    for a in itertools.product(*[range(dims[s]) for s in keep]):
        for b in itertools.product(*[range(dims[s]) for s in keep]):
            ia = np.ravel_multi_index(a, [dims[s] for s in keep])
            ib = np.ravel_multi_index(b, [dims[s] for s in keep])
            for r in itertools.product(*[range(dims[s]) for s in rest]):
                row = [0] * n
                col = [0] * n
                for s, v in zip(keep, a):
                    row[s] = v
                for s, v in zip(keep, b):
                    col[s] = v
                for s, v in zip(rest, r):
                    row[s] = col[s] = v
                out[ia, ib] += full[tuple(row + col)]
    return out


def kron_embed(block, site, dims):
    mats = [np.eye(d) for d in dims]
    mats[site] = block
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------- registers

def test_register_rejects_bad_dims():
    with pytest.raises(InvalidDimension):
        RegisterShape((2, 1))
    with pytest.raises(InvalidDimension):
        RegisterShape(())
    with pytest.raises(TooLarge):
        RegisterShape((2,) * 21)


def test_basis_state_index_convention():
    psi = basis_state((2, 3), "12")
    assert np.flatnonzero(psi.amplitudes).tolist() == [5]
    with pytest.raises(InvalidLabel):
        basis_state((2, 2), "02")
    with pytest.raises(InvalidLabel):
        basis_state((2, 2), "0")


def test_pure_state_norm_checked():
    with pytest.raises(ShapeError):
        PureState((2,), [1.0, 1.0])
    psi = PureState.from_vector((2,), [1.0, 1.0])
    assert np.allclose(psi.amplitudes, [2**-0.5, 2**-0.5])


def test_density_matrix_validation():
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix((2,), [[1, 1], [0, 0]])
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix((2,), np.eye(2))
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix((2,), [[1.5, 0], [0, -0.5]])


# ------------------------------------------------------------ partial trace

@pytest.mark.parametrize("dims,keep", [((2, 2), (0,)), ((2, 3), (1,)), ((2, 3, 2), (2, 0)), ((3, 2, 2), (1, 2))])
def test_partial_trace_matches_loop_reference(dims, keep):
    rng = np.random.default_rng(3)
    rho = random_density_matrix(dims, rng)
    psi = random_state(dims, rng)
    assert np.allclose(partial_trace(rho, keep).matrix, loop_partial_trace(rho.matrix, list(dims), keep), atol=1e-13)
    ref = loop_partial_trace(psi.density_matrix().matrix, list(dims), keep)
    assert np.allclose(partial_trace(psi, keep).matrix, ref, atol=1e-13)


def test_partial_trace_rejects_bad_sites():
    psi = basis_state((2, 2), "00")
    with pytest.raises(InvalidSites):
        partial_trace(psi, (0, 0))
    with pytest.raises(InvalidSites):
        partial_trace(psi, (2,))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.lists(st.integers(2, 3), min_size=2, max_size=4))
def test_reduced_states_are_valid_and_schmidt_symmetric(seed, dims):
    rng = np.random.default_rng(seed)
    psi = random_state(dims, rng)
    cut = int(rng.integers(1, len(dims)))
    a = partial_trace(psi, tuple(range(cut)))
    b = partial_trace(psi, tuple(range(cut, len(dims))))
    assert abs(np.trace(a.matrix) - 1) < 1e-12
    assert np.min(a.eigenvalues()) > -1e-12
    # equal entropies across any cut of a pure state
    assert abs(von_neumann_entropy(a) - von_neumann_entropy(b)) < 1e-9


def test_entropy_values():
    assert von_neumann_entropy(basis_state((2,), "0").density_matrix()) == 0.0
    assert abs(von_neumann_entropy(DensityMatrix((2,), np.eye(2) / 2)) - 1.0) < 1e-14
    assert abs(von_neumann_entropy(DensityMatrix((3,), np.eye(3) / 3)) - np.log2(3)) < 1e-14
    assert abs(purity(DensityMatrix((2,), np.eye(2) / 2)) - 0.5) < 1e-15


def test_trace_distance_orthogonal_states():
    a = basis_state((2,), "0").density_matrix()
    b = basis_state((2,), "1").density_matrix()
    assert abs(trace_distance(a, b) - 1.0) < 1e-15
    assert trace_distance(a, a) == 0.0


@pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3), (3, 2, 2)])
def test_embed_operator_matches_kron(dims):
    rng = np.random.default_rng(0)
    for site in range(len(dims)):
        block = rng.normal(size=(dims[site],) * 2)
        assert np.allclose(embed_operator(block, (site,), dims), kron_embed(block, site, dims))


def test_embed_operator_reversed_site_order():
    cnot = named_gate("CNOT")
    swap = named_gate("SWAP")
    assert np.allclose(embed_operator(cnot, (1, 0), (2, 2)), swap @ cnot @ swap)


# ---------------------------------------------------------------- bases

@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gellmann_orthonormal_traceless_hermitian(d):
    lam = gellmann_basis(d).matrices
    assert len(lam) == d * d - 1
    gram = np.einsum("rab,sba->rs", lam, lam)
    assert np.allclose(gram, 2 * np.eye(d * d - 1), atol=1e-14)
    assert np.allclose(np.einsum("raa->r", lam), 0, atol=1e-14)
    assert np.allclose(lam, lam.conj().transpose(0, 2, 1))


def test_qubit_basis_is_pauli():
    assert np.allclose(gellmann_basis(2).matrices, [X, Y, Z])
    assert np.allclose(generalized_paulis(2), [np.eye(2), X, Y, Z])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_star_coefficients_symmetric(d):
    star = gellmann_basis(d).star_coeffs
    assert np.allclose(star, star.transpose(1, 0, 2))
    assert np.allclose(star, star.transpose(0, 2, 1))
    if d == 2:
        assert np.allclose(star, 0)


def test_gellmann_rejects_small_dim():
    with pytest.raises(InvalidDimension):
        gellmann_basis(1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_bloch_roundtrip(d):
    rho = random_density_matrix((d,), np.random.default_rng(d))
    m = bloch_decompose(rho)
    assert np.allclose(m.recompose(), rho.matrix, atol=1e-14)
    # purity identity for Tr(l l) = 2: Tr rho^2 = (1 + 2|m|^2/d)/d
    assert abs(purity(rho) - (1 + 2 * m.norm2() / d) / d) < 1e-13


def test_label_parsing_and_formatting():
    assert parse_labels("XZ", (2, 2)) == (1, 3)
    assert parse_labels([0, 8], (2, 3)) == (0, 8)
    assert format_labels((1, 3), (2, 2)) == "XZ"
    assert np.allclose(label_matrix((1, 3), (2, 2)), np.kron(X, Z))
    with pytest.raises(InvalidLabel):
        parse_labels("XQ", (2, 2))
    with pytest.raises(InvalidLabel):
        parse_labels([9], (3,))


# --------------------------------------------------------------- circuits

def test_bell_circuit():
    circ = Circuit((2, 2), [("H", (0,)), ("CNOT", (0, 1))])
    psi = run_circuit(circ)
    assert np.allclose(psi.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tensor_application_matches_dense_unitary(seed):
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in rng.integers(2, 4, size=3))
    circ = random_circuit(dims, 8, rng)
    psi = random_state(dims, rng)
    out = apply_circuit(psi, circ)
    assert np.allclose(out.amplitudes, circuit_unitary(circ) @ psi.amplitudes, atol=1e-12)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-12


def test_circuit_rejects_nonunitary_and_bad_sites():
    with pytest.raises(InputError):
        Circuit((2,), [(np.array([[1, 1], [0, 1]]), (0,))])
    with pytest.raises(InvalidSites):
        Circuit((2, 2), [("CNOT", (0, 0))])
    with pytest.raises(ShapeError):
        Circuit((2, 3), [("CNOT", (0, 1))])


# ------------------------------------------------------------ hamiltonians

def test_exact_propagator_matches_expm_both_signs():
    h = heisenberg_hamiltonian(3, np.random.default_rng(1))
    hm = h.matrix()
    assert np.allclose(exact_propagator(h, 0.7), scipy.linalg.expm(1j * 0.7 * hm), atol=1e-12)
    assert np.allclose(exact_propagator(h, 0.7, sign=-1), scipy.linalg.expm(-1j * 0.7 * hm), atol=1e-12)


def test_trotter_gate_count_and_commuting_exactness():
    h = heisenberg_hamiltonian(3, np.random.default_rng(2))
    circ = trotterize(h, 1.0, 5)
    assert len(circ) == 5 * len(h.terms)
    # commuting terms make a single step exact
    zz = PauliStringHamiltonian.from_strings((2, 2, 2), [(0.4, "ZZI"), (1.1, "IZZ"), (0.3, "ZIZ")])
    assert np.allclose(circuit_unitary(trotterize(zz, 0.9, 1)), exact_propagator(zz, 0.9), atol=1e-13)


def test_trotter_identity_term_is_global_phase():
    h = PauliStringHamiltonian.from_strings((2, 2), [(0.5, "II"), (1.0, "XI")])
    assert np.allclose(circuit_unitary(trotterize(h, 1.0, 1)), exact_propagator(h, 1.0), atol=1e-13)


def test_hamiltonian_requires_real_coefficients():
    with pytest.raises(ValueError):
        PauliStringHamiltonian.from_strings((2,), [(1j, "X")])


def test_qutrit_hamiltonian_terms():
    h = PauliStringHamiltonian.from_strings((3, 3), [(0.5, (1, 4)), (0.2, (8, 0))])
    assert np.allclose(h.matrix(), h.matrix().conj().T)
    assert np.allclose(circuit_unitary(trotterize(h, 0.3, 200)), exact_propagator(h, 0.3), atol=1e-3)
