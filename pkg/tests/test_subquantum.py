import numpy as np
import pytest
from scipy.optimize import linprog

from qmeas import states, subquantum as sq
from qmeas.errors import TableError


def lp_feasible(table):
    """Independent oracle: linear program over the 16 quadrivariate cells."""
    a = np.zeros((16, 16))
    for col in range(16):
        bits = np.unravel_index(col, (2, 2, 2, 2))
        for k, (i, j) in enumerate(sq.PAIRS):
            a[4 * k + 2 * bits[i] + bits[j], col] = 1
    res = linprog(np.zeros(16), A_eq=a, b_eq=table.grids.reshape(-1),
                  bounds=[(0, None)] * 16, method="highs")
    return res.status == 0


def product_table(e):
    """Grids with uniform marginals and correlators ``e``."""
    return sq.CorrelationTable(np.array([[[1 + x, 1 - x], [1 - x, 1 + x]] for x in e]) / 4)


class TestTable:
    def test_correlators(self):
        t = product_table([0.1, -0.2, 0.3, 0.4])
        assert np.allclose(t.correlators(), [0.1, -0.2, 0.3, 0.4])

    def test_chsh_value(self):
        # variants carry one minus sign each; value is the largest magnitude
        t = product_table([0.5, 0.5, 0.5, -0.5])
        assert abs(sq.chsh_value(t) - 2.0) < 1e-15

    def test_invalid_table(self):
        with pytest.raises(TableError):
            sq.CorrelationTable(np.ones((4, 2, 2)))
        with pytest.raises(TableError):
            sq.CorrelationTable(np.ones((3, 2, 2)) / 4)


class TestQuantum:
    def test_singlet_tsirelson(self):
        t = sq.quantum_correlation_table(states.singlet(), sq.chsh_settings())
        assert abs(sq.chsh_value(t) - 2 * np.sqrt(2)) < 1e-12
        res = sq.joint_distribution_exists(t)
        assert not res.feasible and res.consistent_marginals
        assert abs(res.violation - 2 * np.sqrt(2)) < 1e-12
        assert not lp_feasible(t)

    def test_product_state_local(self, rng):
        v = states.product_state(states.random_state(2, rng).amplitudes,
                                 states.random_state(2, rng).amplitudes)
        t = sq.quantum_correlation_table(v, sq.chsh_settings())
        assert sq.chsh_value(t) <= 2 + 1e-12
        assert sq.joint_distribution_exists(t).feasible


class TestJointDistribution:
    def test_deterministic_box(self):
        quad = np.zeros(16)
        quad[5] = 1
        t = sq.CorrelationTable(sq._quad_marginals(quad))
        res = sq.joint_distribution_exists(t)
        assert res.feasible
        assert np.allclose(sq._quad_marginals(res.witness), t.grids)

    def test_pr_box(self):
        t = sq.random_nosignaling_table(np.random.default_rng(0), pr_weight=1.0)
        assert not sq.joint_distribution_exists(t).feasible

    def test_signalling_inconsistent(self):
        grids = np.array([[[1, 0], [0, 0]]] * 2 + [[[0, 0], [0, 1]]] * 2, dtype=float)
        res = sq.joint_distribution_exists(sq.CorrelationTable(grids))
        assert not res.feasible and not res.consistent_marginals

    def test_matches_lp_and_chsh(self, rng):
        for _ in range(300):
            t = sq.random_nosignaling_table(rng, pr_weight=float(rng.uniform(0, 0.6)))
            ours = sq.joint_distribution_exists(t).feasible
            assert ours == lp_feasible(t)
            if abs(sq.chsh_value(t) - 2) > 1e-9:
                assert ours == (sq.chsh_value(t) <= 2)


class TestModels:
    def test_uniform_single_probability(self):
        model = sq.noncontextual_sphere_model(sq.chsh_settings.__defaults__[0])
        est = sq.hv_single_probability(model, "a1", 200_000, seed=3)
        assert np.all(np.abs(est.value - 0.5) < 4 * est.stderr + 1e-12)

    def test_sphere_model_linear_correlation(self):
        angles = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)
        t = sq.hv_correlation_table(sq.noncontextual_sphere_model(angles),
                                    ("a1", "b1", "a2", "b2"), 400_000, seed=1)
        for k, (i, j) in enumerate(sq.PAIRS):
            theta = abs(angles[i] - angles[j])
            assert abs(t.correlators()[k] - (-1 + 2 * theta / np.pi)) < 4 * t.stderr[k] + 1e-12
        assert sq.joint_distribution_exists(t).feasible

    def test_contextual_model_singlet_correlation(self):
        angles = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)
        t = sq.trajectory_correlation(sq.contextual_reference_model(angles),
                                      ("a1", "b1", "a2", "b2"), 400_000, seed=2)
        for k, (i, j) in enumerate(sq.PAIRS):
            e = -np.cos(angles[i] - angles[j])
            assert abs(t.correlators()[k] - e) < 4 * t.stderr[k]
        assert sq.chsh_value(t) > 2.7

    def test_degenerate_trajectory_equals_hv(self, rng):
        model = sq.random_hv_model(rng)
        labels = ("a1", "b1", "a2", "b2")
        traj = sq.trajectory_correlation(sq.degenerate_trajectory_model(model, labels),
                                         labels, 50_000, seed=4)
        assert sq.joint_distribution_exists(traj).feasible

    def test_random_hv_models_local(self, rng):
        labels = ("a1", "b1", "a2", "b2")
        for _ in range(10):
            t = sq.hv_correlation_table(sq.random_hv_model(rng), labels, 20_000, seed=5)
            assert sq.joint_distribution_exists(t).feasible
            assert sq.chsh_value(t) <= 2 + 5 * sq.chsh_sigma(t) + 1e-12

    def test_deterministic_seed(self):
        model = sq.noncontextual_sphere_model((0, 1, 2, 3))
        a = sq.hv_correlation_table(model, ("a1", "b1", "a2", "b2"), 100_000, seed=9)
        b = sq.hv_correlation_table(model, ("a1", "b1", "a2", "b2"), 100_000, seed=9)
        assert np.array_equal(a.grids, b.grids)

    def test_unknown_setting(self):
        model = sq.noncontextual_sphere_model((0, 1, 2, 3))
        with pytest.raises(KeyError):
            sq.hv_correlation_table(model, ("a1", "b1", "a2", "zz"), 10, seed=0)
