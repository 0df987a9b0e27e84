import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmeas import states
from qmeas.errors import DimensionError, InvalidStateError
from qmeas.states import StateVector

from conftest import frob, ket


def test_density_from_basis_state():
    assert frob(states.density_from_pure(states.basis_state(2, 0)).matrix, np.diag([1, 0])) < 1e-15


def test_density_from_plus():
    rho = states.density_from_pure(StateVector(ket(1, 1)))
    assert np.allclose(rho.matrix, 0.5)


def test_singlet_projector_is_pure_and_idempotent():
    rho = states.singlet().density()
    # outer product of (0, 1, -1, 0)/sqrt2 by hand
    expected = np.array([[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]]) / 2
    assert frob(rho.matrix, expected) < 1e-15
    assert abs(rho.purity() - 1) < 1e-12
    assert frob(rho.matrix @ rho.matrix, rho.matrix) < 1e-10


def test_unnormalized_rejected():
    with pytest.raises(InvalidStateError):
        StateVector([1.0, 1.0])


def test_invalid_density_rejected():
    with pytest.raises(InvalidStateError):
        states.DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        states.DensityOperator(np.diag([0.5, 0.6]))


def test_schmidt_product_state():
    v = states.product_state(ket(1, 2j), ket(3, -1, 1))
    sf = states.schmidt_decompose(v)
    assert sf.rank == 1 and abs(sf.coefficients[0] - 1) < 1e-12


def test_schmidt_singlet():
    sf = states.schmidt_decompose(states.singlet())
    assert np.allclose(sf.coefficients, [2 ** -0.5] * 2, atol=1e-12)
    assert states.overlap_up_to_phase(sf.reconstruct(), states.singlet()) > 1 - 1e-12


def test_schmidt_already_diagonal_sorted():
    v = StateVector([0.6, 0, 0, 0.8], (2, 2))
    sf = states.schmidt_decompose(v)
    assert np.allclose(sf.coefficients, [0.8, 0.6])
    assert states.overlap_up_to_phase(sf.left_vectors()[0], [0, 1]) > 1 - 1e-12
    assert states.overlap_up_to_phase(sf.right_vectors()[0], [0, 1]) > 1 - 1e-12


def test_schmidt_dimension_mismatch():
    with pytest.raises(DimensionError):
        states.schmidt_decompose(StateVector(ket(1, 1, 1)), (2, 2))


def test_reduce_singlet():
    assert frob(states.reduce(states.singlet().density(), keep=0).matrix, np.eye(2) / 2) < 1e-15


def test_reduce_product(rng):
    r1 = states.random_density(2, rng)
    r2 = states.random_density(3, rng)
    joint = states.DensityOperator(np.kron(r1.matrix, r2.matrix), (2, 3))
    assert frob(states.reduce(joint, keep=0).matrix, r1.matrix) < 1e-12
    assert frob(states.reduce(joint, keep=1).matrix, r2.matrix) < 1e-12


def test_reduce_schmidt_state_squared_coefficients():
    v = StateVector([0.6, 0, 0, 0.8], (2, 2))
    sf = states.schmidt_decompose(v)
    rho2 = states.reduce(v, keep=1).matrix
    # r_j = c_j^2 in the right Schmidt basis
    in_basis = sf.right_basis.conj().T @ rho2 @ sf.right_basis
    assert frob(in_basis, np.diag([0.64, 0.36])) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d1=st.integers(1, 4), d2=st.integers(1, 4))
def test_schmidt_invariants(seed, d1, d2):
    rng = np.random.default_rng(seed)
    v = states.random_state((d1, d2), rng)
    sf = states.schmidt_decompose(v)
    assert abs(np.sum(sf.coefficients ** 2) - 1) < 1e-10
    assert np.all(np.diff(sf.coefficients) <= 1e-15)
    assert states.overlap_up_to_phase(sf.reconstruct(), v) > 1 - 1e-10
    r1 = np.linalg.eigvalsh(states.reduce(v, keep=0).matrix)[::-1]
    r2 = np.linalg.eigvalsh(states.reduce(v, keep=1).matrix)[::-1]
    k = min(d1, d2)
    assert np.allclose(r1[:k], r2[:k], atol=1e-10)
    assert np.allclose(r1[: sf.rank], sf.coefficients ** 2, atol=1e-10)
    # Schmidt vectors are eigenvectors of the reduced operators
    rho1 = states.reduce(v, keep=0).matrix
    for c, a in zip(sf.coefficients, sf.left_basis.T):
        assert np.linalg.norm(rho1 @ a - c ** 2 * a) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 6))
def test_density_from_pure_always_valid(seed, d):
    rng = np.random.default_rng(seed)
    rho = states.density_from_pure(states.random_state(d, rng))
    assert isinstance(rho, states.DensityOperator)
    assert abs(rho.purity() - 1) < 1e-10


def test_schmidt_rank():
    assert states.schmidt_rank(states.singlet()) == 2
    assert states.schmidt_rank(states.product_state(ket(1, 0), ket(0, 1))) == 1
