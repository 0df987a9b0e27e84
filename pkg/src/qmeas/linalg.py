"""Dense complex-matrix kernel for small systems.

Everything operates on plain ``numpy`` arrays of dtype ``complex128``.
Decompositions follow a fixed phase convention so that outputs are
reproducible across runs and BLAS builds:

* every eigen/singular vector is rescaled so that its first component of
  largest modulus is real and positive;
* inside a degenerate cluster (neighbouring values closer than
  ``DEGENERACY_GAP``) the basis is rebuilt by projecting the standard basis
  vectors ``e_0, e_1, ...`` onto the cluster subspace and orthonormalizing
  them in index order.
"""
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NotHermitianError

MAX_SUBSYSTEM_DIM = 64
MAX_TOTAL_DIM = MAX_SUBSYSTEM_DIM * MAX_SUBSYSTEM_DIM
HERMITIAN_TOL = 1e-10
DEGENERACY_GAP = 1e-8

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class HermitianDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


class SVDResult(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray


def as_matrix(m, name="matrix"):
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or 0 in a.shape:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if max(a.shape) > MAX_TOTAL_DIM:
        raise DimensionError(f"{name} side {max(a.shape)} exceeds {MAX_TOTAL_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def as_square(m, name="matrix"):
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def hermiticity_defect(m):
    return float(np.linalg.norm(m - dag(m)))


def is_hermitian(m, tol=HERMITIAN_TOL):
    return hermiticity_defect(m) <= tol


def check_hermitian(m, name="matrix", tol=HERMITIAN_TOL):
    """Validate Hermiticity and return the symmetrized matrix ``(m + m†)/2``."""
    a = as_square(m, name)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(f"{name} is not Hermitian (||m - m^+||_F = {defect:.3e})")
    return (a + dag(a)) / 2


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.linalg.norm(dag(u) @ u - np.eye(u.shape[0])) <= tol


def tensor_product(a, b):
    """Kronecker product with block layout ``a[i, j] * b``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > MAX_TOTAL_DIM:
        raise DimensionError(f"tensor product of size {rows}x{cols} exceeds {MAX_TOTAL_DIM}")
    return np.kron(a, b)


def _check_dims(dims):
    if len(dims) != 2:
        raise DimensionError("only bipartite splits are supported")
    d1, d2 = (int(d) for d in dims)
    if d1 < 1 or d2 < 1:
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if max(d1, d2) > MAX_SUBSYSTEM_DIM:
        raise DimensionError(f"subsystem dimension exceeds {MAX_SUBSYSTEM_DIM}")
    return d1, d2


def partial_trace(m, dims, keep):
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    m : array_like
        Square matrix on ``C^d1 (x) C^d2``.
    dims : pair of int
        ``(d1, d2)``.
    keep : {0, 1}
        Index of the subsystem that survives.
    """
    d1, d2 = _check_dims(dims)
    a = as_square(m)
    if a.shape[0] != d1 * d2:
        raise DimensionError(f"matrix side {a.shape[0]} does not match dims {d1}x{d2}")
    t = a.reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def fix_phase(v):
    """Rotate a vector so its first largest-modulus component is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    peak = mags.max()
    if peak == 0:
        return v
    idx = int(np.argmax(mags >= peak * (1 - 1e-9)))
    return v * (np.conj(v[idx]) / mags[idx])


def _clusters(values, gap):
    """Split a sorted 1-D array into runs whose neighbours differ by < gap."""
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[i - 1]) >= gap:
            groups.append(slice(start, i))
            start = i
    return groups


def _canonical_basis(block):
    """Deterministic orthonormal basis of span(block columns)."""
    k = block.shape[1]
    proj = block @ dag(block)
    chosen = []
    for j in range(block.shape[0]):
        w = proj[:, j].copy()
        for _ in range(2):
            for u in chosen:
                w -= (u.conj() @ w) * u
            w = proj @ w
        norm = np.linalg.norm(w)
        if norm > 1e-3:
            chosen.append(fix_phase(w / norm))
            if len(chosen) == k:
                break
    return np.column_stack(chosen)


def eig_hermitian(m):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = check_hermitian(m)
    w, v = np.linalg.eigh(a)
    w, v = w[::-1].copy(), v[:, ::-1].copy()
    for sl in _clusters(w, DEGENERACY_GAP):
        if sl.stop - sl.start > 1:
            v[:, sl] = _canonical_basis(v[:, sl])
        else:
            v[:, sl.start] = fix_phase(v[:, sl.start])
    return HermitianDecomposition(w, v)


def svd(m):
    """Thin SVD ``m = U diag(s) V^+`` with ``s`` descending.

    Singular vectors follow the module phase convention; ``U`` fixes the
    phase and ``V`` follows along so that the product is unchanged.
    """
    a = as_matrix(m)
    U, s, Vh = np.linalg.svd(a, full_matrices=False)
    V = dag(Vh)
    scale = max(float(s[0]) if s.size else 0.0, 1.0)
    zero = s <= 1e-12 * scale
    for sl in _clusters(s, DEGENERACY_GAP * scale):
        idx = np.arange(sl.start, sl.stop)
        if zero[sl.start]:
            # left and right null directions are unrelated
            if len(idx) > 1:
                U[:, sl] = _canonical_basis(U[:, sl])
                V[:, sl] = _canonical_basis(V[:, sl])
            else:
                U[:, sl.start] = fix_phase(U[:, sl.start])
                V[:, sl.start] = fix_phase(V[:, sl.start])
            continue
        if len(idx) > 1:
            W = _canonical_basis(U[:, sl])
            R = dag(U[:, sl]) @ W
            U[:, sl] = W
            V[:, sl] = V[:, sl] @ R
        else:
            j = sl.start
            u = U[:, j]
            mags = np.abs(u)
            k = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
            phase = np.conj(u[k]) / mags[k]
            U[:, j] *= phase
            V[:, j] *= phase
    return SVDResult(U, s, V)


def unitary_from_hermitian(h, t=1.0):
    """``exp(-i t h)`` for Hermitian ``h``."""
    dec = eig_hermitian(h)
    v = dec.eigenvectors
    return (v * np.exp(-1j * t * dec.eigenvalues)) @ dag(v)


def random_unitary(d, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d, rng, scale=1.0):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (z + dag(z)) / 2
