"""Joint nonideal measurements of incompatible observables.

A bivariate POVM ``R_mn`` jointly measures ``P`` and ``Q`` nonideally when
its marginals are stochastic mixtures of the targets::

    sum_n R_mn = sum_m' lambda[m, m'] P_m'      (columns of lambda sum to 1)
    sum_m R_mn = sum_n' mu[n, n'] Q_n'

The average row entropy of ``lambda`` (in nats) measures how far the
marginal is from ideal, and for PVM targets the two entropies obey
``J_lambda + J_mu >= -ln max_mn Tr P_m Q_n``.
"""
from dataclasses import dataclass

import numpy as np

from . import _qp, linalg
from .errors import (DimensionError, InfeasibleDecompositionError,
                     InvalidMeasurementError)
from .observables import DiscretePOVM, DiscretePVM, spin_pvm

TOL = 1e-10
FEASIBILITY_TOL = 1e-8
STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BivariatePOVM:
    """Grid of effects ``effects[m, n]``, shape ``(M, N, d, d)``."""

    effects: np.ndarray
    row_labels: tuple = None
    col_labels: tuple = None

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=complex)
        if eff.ndim != 4 or eff.shape[2] != eff.shape[3]:
            raise DimensionError(f"bivariate effects must have shape (M, N, d, d), got {eff.shape}")
        m, n, d, _ = eff.shape
        if np.linalg.norm(eff - linalg.dag(eff)) > TOL * max(1, m * n):
            raise InvalidMeasurementError("bivariate effects are not Hermitian")
        eff = (eff + linalg.dag(eff)) / 2
        low = np.linalg.eigvalsh(eff).min()
        if low < -TOL:
            raise InvalidMeasurementError(f"bivariate effect has negative eigenvalue {low:.3e}")
        if np.linalg.norm(eff.sum(axis=(0, 1)) - np.eye(d)) > TOL:
            raise InvalidMeasurementError("bivariate effects do not sum to identity")
        rows = tuple(range(m)) if self.row_labels is None else tuple(self.row_labels)
        cols = tuple(range(n)) if self.col_labels is None else tuple(self.col_labels)
        if len(rows) != m or len(cols) != n:
            raise InvalidMeasurementError("label counts do not match the grid")
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def dim(self):
        return self.effects.shape[2]

    @property
    def shape(self):
        return self.effects.shape[:2]

    def conjugate(self, u):
        u = np.asarray(u, dtype=complex)
        return BivariatePOVM(u @ self.effects @ linalg.dag(u), self.row_labels, self.col_labels)


def marginals(r):
    """Row and column marginal POVMs of a bivariate POVM."""
    rows = DiscretePOVM(r.effects.sum(axis=1), r.row_labels)
    cols = DiscretePOVM(r.effects.sum(axis=0), r.col_labels)
    return rows, cols


@dataclass(frozen=True, eq=False)
class NonidealityMatrix:
    """Nonnegative, column-stochastic ``entries[m, m']``."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2:
            raise DimensionError("nonideality matrix must be 2-D")
        if e.min() < -STOCHASTIC_TOL:
            raise InvalidMeasurementError("nonideality matrix has negative entries")
        e = np.maximum(e, 0.0)
        if np.abs(e.sum(axis=0) - 1).max() > STOCHASTIC_TOL:
            raise InvalidMeasurementError("nonideality matrix columns must sum to 1")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class NonidealityFit:
    """Outcome of :func:`solve_nonideality`.

    ``matrix`` is the best column-stochastic fit even when ``feasible`` is
    False; ``unique`` is False when the target effects are linearly
    dependent, in which case ``matrix`` is the minimum-Frobenius-norm
    optimum.
    """

    matrix: NonidealityMatrix
    residual: float
    feasible: bool
    unique: bool
    iterations: int


def _real_vec(effects):
    """Hermitian matrices as real vectors (real and imaginary parts)."""
    flat = effects.reshape(len(effects), -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def solve_nonideality(observed, ideal, max_iter=100_000):
    """Recover ``lambda`` with ``observed_m ~= sum_m' lambda[m, m'] ideal_m'``.

    Least squares over the product of simplices (each column of ``lambda``
    a probability vector), solved by an active-set method started at the
    uniform matrix.
    """
    if observed.dim != ideal.dim:
        raise DimensionError("observed and ideal POVMs act on different dimensions")
    M, K = len(observed), len(ideal)
    D = _real_vec(ideal.effects).T              # (2 d^2, K)
    O = _real_vec(observed.effects)             # (M, 2 d^2)
    G = D.T @ D
    H = np.kron(np.eye(M), G)
    g = -(O @ D).reshape(-1)
    A = np.kron(np.ones((1, M)), np.eye(K))     # column sums, x = vec(lambda) row-major
    b = np.ones(K)
    x0 = np.full(M * K, 1.0 / M)
    res = _qp.solve_qp(H, g, A, b, x0, max_iter=max_iter)
    x, iters = res.x, res.iterations

    gram_rank = np.linalg.matrix_rank(G, tol=1e-10 * max(1.0, np.abs(G).max()))
    unique = gram_rank == K
    if not unique:
        # pin the fitted effects, then take the smallest lambda producing them
        w, v = np.linalg.eigh(G)
        R = v[:, w > 1e-10 * max(1.0, w.max())].T
        pin = np.kron(np.eye(M), R)
        A2 = np.vstack([A, pin])
        b2 = np.concatenate([b, pin @ x])
        res2 = _qp.solve_qp(np.eye(M * K), np.zeros(M * K), A2, b2, x, max_iter=max_iter)
        x, iters = res2.x, iters + res2.iterations

    lam = x.reshape(M, K)
    lam = lam / lam.sum(axis=0, keepdims=True)
    fitted = np.einsum("mk,kij->mij", lam, ideal.effects)
    residual = float(np.linalg.norm(observed.effects - fitted))
    return NonidealityFit(NonidealityMatrix(lam), residual, residual < FEASIBILITY_TOL,
                          bool(unique), iters)


def entropy_nonideality(lam):
    """Average row entropy ``-(1/N) sum lambda ln(lambda / rowsum)`` in nats.

    ``N`` is the number of columns (target outcomes); ``0 ln 0 = 0``.
    """
    e = lam.entries if isinstance(lam, NonidealityMatrix) else np.asarray(lam, float)
    rows = e.sum(axis=1, keepdims=True)
    safe_rows = np.where(rows > 0, rows, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(e > 0, e * np.log(e / safe_rows), 0.0)
    return float(max(-terms.sum() / e.shape[1], 0.0))


def _pvm_or_none(p):
    if isinstance(p, DiscretePVM):
        return p
    try:
        return DiscretePVM(p.effects, p.labels)
    except InvalidMeasurementError:
        return None


def martens_bound(p, q):
    """``-ln max_mn Tr(P_m Q_n)`` for two PVMs of the same dimension."""
    pp, qq = _pvm_or_none(p), _pvm_or_none(q)
    if pp is None or qq is None:
        raise InvalidMeasurementError("the entropic bound is only defined for PVM targets")
    if pp.dim != qq.dim:
        raise DimensionError("PVMs act on different dimensions")
    overlaps = np.einsum("aij,bji->ab", pp.effects, qq.effects).real
    return float(-np.log(overlaps.max()))


@dataclass(frozen=True)
class MartensReport:
    j_lambda: float
    j_mu: float
    bound: float = None
    satisfied: bool = None
    lambda_fit: NonidealityFit = None
    mu_fit: NonidealityFit = None

    @property
    def j_sum(self):
        return self.j_lambda + self.j_mu

    @property
    def margin(self):
        return None if self.bound is None else self.j_sum - self.bound


def verify_martens(r, p, q):
    """Entropic nonideality of both marginals against the targets ``p``, ``q``.

    Raises :class:`InfeasibleDecompositionError` when a marginal is not a
    stochastic mixture of its target.  For non-PVM targets the bound and
    ``satisfied`` are ``None``.
    """
    rows, cols = marginals(r)
    fits = []
    for observed, target, name in ((rows, p, "row"), (cols, q, "column")):
        fit = solve_nonideality(observed, target)
        if not fit.feasible:
            raise InfeasibleDecompositionError(
                f"{name} marginal is not a nonideal version of its target "
                f"(residual {fit.residual:.3e})", fit.residual)
        fits.append(fit)
    j_l = entropy_nonideality(fits[0].matrix)
    j_m = entropy_nonideality(fits[1].matrix)
    if _pvm_or_none(p) is None or _pvm_or_none(q) is None:
        return MartensReport(j_l, j_m, None, None, fits[0], fits[1])
    bound = martens_bound(p, q)
    return MartensReport(j_l, j_m, bound, j_l + j_m >= bound - 1e-9, fits[0], fits[1])


def unsharp_spin_grid(gamma_z, gamma_x, gamma_y=0.0):
    """``R_mn = (I + m gz sz + n gx sx + m n gy sy)/4`` with ``m, n`` in (+1, -1)."""
    signs = (1, -1)
    eff = np.empty((2, 2, 2, 2), dtype=complex)
    for i, m in enumerate(signs):
        for j, n in enumerate(signs):
            eff[i, j] = (linalg.I2 + m * gamma_z * linalg.SIGMA_Z + n * gamma_x * linalg.SIGMA_X
                         + m * n * gamma_y * linalg.SIGMA_Y) / 4
    return BivariatePOVM(eff, signs, signs)


def random_qubit_joint_measurement(rng):
    """Random valid joint nonideal measurement of a random qubit MUB pair.

    The grid is ``(c_mn I + m a sz + n b sx + m n c sy)/4`` with classical
    weights ``c_mn = 1 + m alpha + n beta + m n delta`` and the Bloch part
    scaled to keep every effect positive; everything is then rotated by a
    Haar unitary.  A quarter of the draws are pure unsharp pairs on the
    boundary ``a^2 + b^2 = 1`` (some with ``a`` or ``b`` exactly zero),
    where the bound is tight or nearly so.  Returns ``(R, P, Q)``.
    """
    if rng.random() < 0.25:
        phi = rng.choice([0.0, np.pi / 2, rng.uniform(0, 2 * np.pi)])
        return _rotated_grid(rng, (0.0, 0.0, 0.0), (np.cos(phi), np.sin(phi), 0.0))
    while True:
        alpha, beta, delta = rng.uniform(-1, 1, 3) * rng.uniform(0, 0.6)
        weights = [1 + m * alpha + n * beta + m * n * delta for m in (1, -1) for n in (1, -1)]
        if min(weights) > 1e-3:
            break
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    radius = min(weights) * (1.0 if rng.random() < 0.25 else rng.random())
    return _rotated_grid(rng, (alpha, beta, delta), radius * direction)


def _rotated_grid(rng, classical, bloch):
    alpha, beta, delta = classical
    a, b, c = bloch
    eff = np.empty((2, 2, 2, 2), dtype=complex)
    for i, m in enumerate((1, -1)):
        for j, n in enumerate((1, -1)):
            w = 1 + m * alpha + n * beta + m * n * delta
            eff[i, j] = (w * linalg.I2 + m * a * linalg.SIGMA_Z + n * b * linalg.SIGMA_X
                         + m * n * c * linalg.SIGMA_Y) / 4
    u = linalg.random_unitary(2, rng)
    r = BivariatePOVM(eff, (1, -1), (1, -1)).conjugate(u)
    p = spin_pvm(0.0).conjugate(u)
    q = spin_pvm(np.pi / 2).conjugate(u)
    return r, p, q
