import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmeas import linalg
from qmeas.errors import DimensionError, NotHermitianError
from qmeas.linalg import I2, SIGMA_X, SIGMA_Z

from conftest import frob


def kron_by_hand(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def ptrace_by_hand(m, d1, d2, keep):
    if keep == 0:
        out = np.zeros((d1, d1), dtype=complex)
        for i in range(d1):
            for k in range(d1):
                out[i, k] = sum(m[i * d2 + j, k * d2 + j] for j in range(d2))
    else:
        out = np.zeros((d2, d2), dtype=complex)
        for j in range(d2):
            for l in range(d2):
                out[j, l] = sum(m[i * d2 + j, i * d2 + l] for i in range(d1))
    return out


class TestTensorProduct:
    def test_identity(self):
        assert np.array_equal(linalg.tensor_product(I2, I2), np.eye(4))

    def test_zz_diagonal(self):
        assert np.allclose(np.diag(linalg.tensor_product(SIGMA_Z, SIGMA_Z)), [1, -1, -1, 1])

    def test_block_layout(self, rng):
        a = rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3))
        t = linalg.tensor_product(a, b)
        assert t.shape == (6, 6)
        assert np.allclose(t[:3, :3], a[0, 0] * b)
        assert np.allclose(t, kron_by_hand(a, b))

    def test_associative_on_integers(self, rng):
        a, b, c = (rng.integers(-5, 6, (2, 3)) for _ in range(3))
        left = linalg.tensor_product(linalg.tensor_product(a, b), c)
        right = linalg.tensor_product(a, linalg.tensor_product(b, c))
        assert np.array_equal(left, right)

    def test_size_limit(self):
        with pytest.raises(DimensionError):
            linalg.tensor_product(np.eye(65), np.eye(65))


class TestPartialTrace:
    def test_product_state_factorizes(self, rng):
        from qmeas.states import random_density
        r1 = random_density(3, rng).matrix
        r2 = random_density(2, rng).matrix
        assert frob(linalg.partial_trace(np.kron(r1, r2), (3, 2), 0), r1) < 1e-12

    def test_singlet(self):
        psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
        rho = np.outer(psi, psi)
        assert frob(linalg.partial_trace(rho, (2, 2), 0), I2 / 2) < 1e-15

    def test_maximally_mixed(self):
        assert frob(linalg.partial_trace(np.eye(4) / 4, (2, 2), 0), I2 / 2) < 1e-15

    @pytest.mark.parametrize("dims", [(2, 3), (3, 2), (4, 4), (1, 5)])
    @pytest.mark.parametrize("keep", [0, 1])
    def test_against_loops(self, rng, dims, keep):
        n = dims[0] * dims[1]
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        out = linalg.partial_trace(m, dims, keep)
        assert frob(out, ptrace_by_hand(m, *dims, keep)) < 1e-12
        assert abs(np.trace(out) - np.trace(m)) < 1e-12

    def test_linear(self, rng):
        a = rng.standard_normal((6, 6))
        b = rng.standard_normal((6, 6))
        lhs = linalg.partial_trace(2 * a - 3j * b, (2, 3), 1)
        rhs = 2 * linalg.partial_trace(a, (2, 3), 1) - 3j * linalg.partial_trace(b, (2, 3), 1)
        assert frob(lhs, rhs) < 1e-12

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            linalg.partial_trace(np.eye(5), (2, 2), 0)


class TestEig:
    def test_sigma_z(self):
        dec = linalg.eig_hermitian(SIGMA_Z)
        assert np.allclose(dec.eigenvalues, [1, -1])
        assert np.allclose(dec.eigenvectors, np.eye(2))

    def test_sigma_x(self):
        # characteristic polynomial t^2 - 1 -> t = +-1
        dec = linalg.eig_hermitian(SIGMA_X)
        assert np.allclose(dec.eigenvalues, [1, -1])
        assert np.allclose(dec.eigenvectors[:, 0], np.array([1, 1]) / np.sqrt(2))
        assert np.allclose(dec.eigenvectors[:, 1], np.array([1, -1]) / np.sqrt(2))

    def test_degenerate_identity_is_canonical(self):
        dec = linalg.eig_hermitian(np.eye(3))
        assert np.allclose(dec.eigenvalues, 1)
        assert np.allclose(dec.eigenvectors, np.eye(3))

    def test_degenerate_cluster_deterministic(self, rng):
        u = linalg.random_unitary(4, rng)
        m = u @ np.diag([2.0, 1.0, 1.0, -1.0]) @ u.conj().T
        a = linalg.eig_hermitian(m)
        b = linalg.eig_hermitian(m.copy())
        assert np.array_equal(a.eigenvectors, b.eigenvectors)
        assert frob(a.reconstruct(), m) < 1e-10

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            linalg.eig_hermitian(np.array([[0, 1], [0, 0]]))

    def test_symmetrizes_within_tolerance(self):
        m = SIGMA_X + np.array([[0, 1e-12], [0, 0]])
        dec = linalg.eig_hermitian(m)
        assert np.allclose(dec.eigenvalues, [1, -1])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 8))
    def test_reconstruction(self, seed, d):
        rng = np.random.default_rng(seed)
        m = linalg.random_hermitian(d, rng)
        dec = linalg.eig_hermitian(m)
        v = dec.eigenvectors
        assert frob(v.conj().T @ v, np.eye(d)) < 1e-10
        assert frob(dec.reconstruct(), m) < 1e-10
        assert np.all(np.diff(dec.eigenvalues) <= 0)
        # phase convention: first largest component real positive
        for col in v.T:
            k = np.argmax(np.abs(col) >= np.abs(col).max() * (1 - 1e-9))
            assert abs(col[k].imag) < 1e-12 and col[k].real > 0


class TestSVD:
    def test_diagonal(self):
        assert np.allclose(linalg.svd(np.diag([3.0, 2.0])).s, [3, 2])

    def test_rank_one(self, rng):
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        s = linalg.svd(np.outer(u, v.conj())).s
        assert abs(s[0] - 1) < 1e-12 and np.all(s[1:] < 1e-12)

    def test_singlet_coefficients(self):
        c = np.array([[0, 1], [-1, 0]]) / np.sqrt(2)
        # c^+ c = I/2, so both singular values are 1/sqrt(2)
        assert np.allclose(c.conj().T @ c, I2 / 2)
        assert np.allclose(linalg.svd(c).s, [2 ** -0.5] * 2)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), r=st.integers(1, 6), c=st.integers(1, 6))
    def test_reconstruction_and_unitary_invariance(self, seed, r, c):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
        U, s, V = linalg.svd(m)
        assert frob((U * s) @ V.conj().T, m) < 1e-10
        k = min(r, c)
        assert frob(U.conj().T @ U, np.eye(k)) < 1e-10
        assert frob(V.conj().T @ V, np.eye(k)) < 1e-10
        w1, w2 = linalg.random_unitary(r, rng), linalg.random_unitary(c, rng)
        assert np.allclose(linalg.svd(w1 @ m @ w2).s, s, atol=1e-10)

    def test_degenerate_reconstruction(self):
        c = np.array([[0, 1], [-1, 0]]) / np.sqrt(2)
        U, s, V = linalg.svd(c)
        assert frob((U * s) @ V.conj().T, c) < 1e-12
