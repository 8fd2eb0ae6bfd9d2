import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomosim.errors import InvalidMode, ShapeError
from tomosim.fermions import (
    FermionOperator,
    PauliSum,
    fock_ladder_matrix,
    jw_map,
    ladder_image,
    onebody_expectation,
    validate_car,
)
from tomosim.statecore import basis_state, label_matrix, random_state


def test_creation_image_three_modes():
    img = ladder_image(3, 2, dagger=True)
    assert img.strings() == pytest.approx({"ZZX": 0.5, "ZZY": -0.5j})
    plain = ladder_image(3, 2, dagger=True, mode_sign=False)
    assert plain.strings() == pytest.approx({"ZZX": 0.5, "ZZY": -0.5j})
    odd = ladder_image(2, 1, dagger=True)
    assert odd.strings() == pytest.approx({"ZX": -0.5, "ZY": 0.5j})


def test_number_operator_image():
    n = jw_map(FermionOperator.number(2, 1))
    assert n.strings() == pytest.approx({"II": 0.5, "IZ": -0.5})


def test_creation_fills_the_mode():
    vac = basis_state((2, 2), "00").amplitudes
    cdag = ladder_image(2, 0, dagger=True).matrix()
    assert np.allclose(cdag @ vac, basis_state((2, 2), "10").amplitudes)


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("mode_sign", [True, False])
def test_images_match_occupation_construction(n, mode_sign):
    for j in range(n):
        c = ladder_image(n, j, dagger=False, mode_sign=mode_sign).matrix()
        assert np.allclose(c, fock_ladder_matrix(n, j, mode_sign), atol=1e-15)


@pytest.mark.parametrize("n", range(1, 7))
def test_anticommutation(n):
    rep = validate_car(n)
    assert rep.passed and rep.max_deviation <= 1e-12


def test_car_mode_limit():
    with pytest.raises(InvalidMode):
        validate_car(7)


def test_pauli_product_table():
    x = PauliSum(1, {(1,): 1.0})
    y = PauliSum(1, {(2,): 1.0})
    assert (x * y).strings() == pytest.approx({"Z": 1j})
    assert (y * x).strings() == pytest.approx({"Z": -1j})
    assert (x * x).strings() == pytest.approx({"I": 1.0})


def test_hopping_term_is_hermitian_and_number_conserving():
    n = 4
    hop = FermionOperator(n, ((1.0, ((0, True), (2, False))), (1.0, ((2, True), (0, False)))))
    h = jw_map(hop).matrix()
    assert np.allclose(h, h.conj().T)
    total = sum(jw_map(FermionOperator.number(n, j)).matrix() for j in range(n))
    assert np.allclose(h @ total, total @ h)
    # the (-1)^j mode sign cancels when both modes have the same parity
    assert np.allclose(h, jw_map(hop, mode_sign=False).matrix())


def test_invalid_modes():
    with pytest.raises(InvalidMode):
        FermionOperator(3, ((1.0, ((3, True),)),))
    with pytest.raises(InvalidMode):
        ladder_image(2, 2, True)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_onebody_two_routes_agree(seed, n):
    rng = np.random.default_rng(seed)
    psi = random_state((2,) * n, rng)
    eps = rng.normal(size=n)
    rep = onebody_expectation(psi, eps)
    h = sum(e * jw_map(FermionOperator.number(n, j)).matrix() for j, e in enumerate(eps))
    oracle = np.vdot(psi.amplitudes, h @ psi.amplitudes).real
    assert abs(rep.value - oracle) < 1e-12
    assert abs(rep.direct_value - rep.value) < 1e-12
    assert all(0 <= o <= 1 for o in rep.occupations)


def test_onebody_large_register_uses_diagonal_route():
    psi = random_state((2,) * 11, np.random.default_rng(0))
    eps = np.linspace(-1, 1, 11)
    rep = onebody_expectation(psi, eps)
    assert abs(rep.value - rep.direct_value) < 1e-12


def test_onebody_validation():
    with pytest.raises(ShapeError):
        onebody_expectation(random_state((3,), np.random.default_rng(0)), [1.0])
    with pytest.raises(ShapeError):
        onebody_expectation(random_state((2, 2), np.random.default_rng(0)), [1.0])


def test_number_image_is_projector_onto_one():
    assert np.allclose(jw_map(FermionOperator.number(1, 0)).matrix(), (np.eye(2) - label_matrix((3,), (2,))) / 2)
