import numpy as np
import pytest

from qmeas import epr, linalg, observables as ob, states
from qmeas.errors import DimensionError, ZeroProbabilityError
from qmeas.states import StateVector

from conftest import frob, ket, projector

Z = ob.computational_pvm(2)
X = ob.spin_pvm(np.pi / 2)


def test_singlet_zz_anticorrelated():
    grid = epr.joint_probability(epr.EPRScenario(states.singlet(), Z, Z))
    assert np.allclose(grid, [[0, 0.5], [0.5, 0]], atol=1e-15)
    assert np.allclose(epr.conditional_probability(grid, 0), [0, 1])


def test_singlet_zx_uniform():
    grid = epr.joint_probability(epr.EPRScenario(states.singlet(), Z, X))
    assert np.allclose(grid, 0.25, atol=1e-15)


def test_singlet_correlation_cosine():
    for theta in np.linspace(0, np.pi, 7):
        grid = epr.joint_probability(epr.EPRScenario(states.singlet(), Z, ob.spin_pvm(theta)))
        e = grid[0, 0] - grid[0, 1] - grid[1, 0] + grid[1, 1]
        assert abs(e + np.cos(theta)) < 1e-12


def test_prepared_state_singlet():
    rho = epr.conditionally_prepared_state(states.singlet(), Z, 0)
    assert frob(rho.matrix, np.diag([0, 1])) < 1e-15
    rho = epr.conditionally_prepared_state(states.singlet(), X, 0)
    assert frob(rho.matrix, projector(ket(1, -1))) < 1e-12


def test_prepared_state_schmidt_pvm():
    v = StateVector([0.6, 0, 0, 0.8], (2, 2))
    sf = states.schmidt_decompose(v)
    pvm = sf.left_pvm()
    for i in range(2):
        rho = epr.conditionally_prepared_state(v, pvm, i)
        b = sf.right_vectors()[i].amplitudes
        assert frob(rho.matrix, projector(b)) < 1e-12


def test_zero_probability_outcome():
    with pytest.raises(ZeroProbabilityError):
        epr.conditionally_prepared_state(states.product_state(ket(1, 0), ket(1, 0)), Z, 1)


def test_dimension_checks():
    with pytest.raises(DimensionError):
        epr.EPRScenario(states.singlet(), ob.computational_pvm(3), Z)


def test_mixture_identity(rng):
    # sum_i p_i rho_2|i = Tr_1 |psi><psi| for any PVM on particle 1
    for _ in range(20):
        d1, d2 = rng.integers(2, 5, 2)
        v = states.random_state((d1, d2), rng)
        pvm = ob.DiscretePVM.from_basis(linalg.random_unitary(d1, rng))
        p = epr.outcome_probabilities_first(v, pvm)
        mix = sum(pi * epr.conditionally_prepared_state(v, pvm, i).matrix
                  for i, pi in enumerate(p) if pi > 1e-12)
        assert frob(mix, states.reduce(v, keep=1).matrix) < 1e-10


def test_contextual_state_idempotent_and_reproduces(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        rho = states.random_density(d, rng)
        pvm = ob.DiscretePVM.from_basis(linalg.random_unitary(d, rng))
        c = epr.contextual_state(rho, pvm)
        assert frob(epr.contextual_state(c, pvm).matrix, c.matrix) < 1e-12
        assert np.allclose(ob.probabilities(c, pvm), ob.probabilities(rho, pvm), atol=1e-12)
        assert np.linalg.norm(linalg.commutator(c.matrix, pvm.observable())) < 1e-10


def test_contextual_pair_locality(rng):
    # context of A (x) B on the pair, traced over particle 2, equals the
    # context of A applied to the reduced state of particle 1
    for _ in range(20):
        v = states.random_state((2, 3), rng)
        a = ob.DiscretePVM.from_basis(linalg.random_unitary(2, rng))
        b = ob.DiscretePVM.from_basis(linalg.random_unitary(3, rng))
        pair = epr.two_particle_contextual_state(v, a, b)
        left = states.reduce(pair, keep=0).matrix
        expected = epr.contextual_state(states.reduce(v, keep=0), a).matrix
        assert frob(left, expected) < 1e-10


def test_analyze_report():
    rep = epr.analyze(epr.EPRScenario(states.singlet(), Z, Z))
    assert np.allclose(rep.first_marginal, [0.5, 0.5])
    assert frob(rep.contextual_first.matrix, np.eye(2) / 2) < 1e-15
    assert set(rep.prepared_states) == {0, 1}
