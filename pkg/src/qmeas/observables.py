"""Standard (PVM) and generalized (POVM) observables.

Measurement models follow the convention ``M_m = Tr_a[rho_a U^+ E_m U]``
with the object as the first tensor factor and the apparatus second.
``hbar = 1`` everywhere.
"""
from dataclasses import dataclass

import numpy as np

from . import _rng, linalg
from .errors import DimensionError, InvalidMeasurementError
from .states import DensityOperator, as_density

TOL = 1e-10


def _as_effects(effects):
    arr = np.asarray(effects, dtype=complex)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise DimensionError(f"effects must have shape (k, d, d), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMeasurementError("effects contain NaN or Inf")
    return arr


@dataclass(frozen=True, eq=False)
class DiscretePOVM:
    """Positive effects ``M_m`` summing to the identity."""

    effects: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        eff = _as_effects(self.effects)
        labels = tuple(range(len(eff))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(eff):
            raise InvalidMeasurementError("one label per effect required")
        for k, e in enumerate(eff):
            defect = linalg.hermiticity_defect(e)
            if defect > TOL:
                raise InvalidMeasurementError(f"effect {labels[k]!r} not Hermitian ({defect:.2e})")
        eff = (eff + linalg.dag(eff)) / 2
        ev = np.linalg.eigvalsh(eff)
        if ev.min() < -TOL or ev.max() > 1 + TOL:
            raise InvalidMeasurementError(
                f"effect eigenvalues outside [0, 1]: [{ev.min():.3e}, {ev.max():.3e}]")
        completeness = np.linalg.norm(eff.sum(axis=0) - np.eye(eff.shape[1]))
        if completeness > TOL:
            raise InvalidMeasurementError(f"effects do not sum to identity ({completeness:.2e})")
        self._extra_checks(eff)
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)
        object.__setattr__(self, "labels", labels)

    def _extra_checks(self, eff):
        pass

    @property
    def dim(self):
        return self.effects.shape[1]

    def __len__(self):
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    def __getitem__(self, k):
        return self.effects[k]

    def relabel(self, labels):
        return type(self)(self.effects, labels)

    def conjugate(self, u):
        """Unitarily rotated copy ``{U M U^+}``."""
        u = np.asarray(u, dtype=complex)
        return type(self)(u @ self.effects @ linalg.dag(u), self.labels)

    def __repr__(self):
        return f"{type(self).__name__}(labels={self.labels}, dim={self.dim})"


class DiscretePVM(DiscretePOVM):
    """Mutually orthogonal projectors summing to the identity."""

    def _extra_checks(self, eff):
        for k, p in enumerate(eff):
            if np.linalg.norm(p @ p - p) > TOL:
                raise InvalidMeasurementError(f"effect {k} is not a projector")
        for i in range(len(eff)):
            for j in range(i + 1, len(eff)):
                if np.linalg.norm(eff[i] @ eff[j]) > TOL:
                    raise InvalidMeasurementError(f"projectors {i} and {j} not orthogonal")

    @classmethod
    def from_basis(cls, vectors, labels=None, complete=False):
        """Rank-one projectors onto the columns of ``vectors``.

        With ``complete=True`` an incomplete orthonormal set gets one extra
        outcome, the projector onto the orthogonal complement.
        """
        vecs = np.asarray(vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs[:, None]
        projs = [np.outer(v, v.conj()) for v in vecs.T]
        rest = np.eye(vecs.shape[0]) - sum(projs)
        if complete and np.linalg.norm(rest) > TOL:
            projs.append(rest)
        return cls(np.array(projs), labels)

    @classmethod
    def from_observable(cls, a):
        """Spectral projectors of a Hermitian matrix, labelled by eigenvalue."""
        dec = linalg.eig_hermitian(a)
        projs, labels = [], []
        for sl in linalg._clusters(dec.eigenvalues, 1e-8):
            v = dec.eigenvectors[:, sl]
            projs.append(v @ linalg.dag(v))
            labels.append(float(np.mean(dec.eigenvalues[sl])))
        return cls(np.array(projs), labels)

    def observable(self, values=None):
        """Hermitian operator ``sum_m a_m P_m``."""
        values = self.labels if values is None else values
        return np.einsum("k,kij->ij", np.asarray(values, dtype=float), self.effects)


def computational_pvm(d):
    return DiscretePVM.from_basis(np.eye(d))


def spin_pvm(theta, phi=0.0):
    """Qubit spin PVM along ``(sin t cos p, sin t sin p, cos t)``; labels (+1, -1)."""
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    op = n[0] * linalg.SIGMA_X + n[1] * linalg.SIGMA_Y + n[2] * linalg.SIGMA_Z
    return DiscretePVM(np.array([(linalg.I2 + op) / 2, (linalg.I2 - op) / 2]), (1, -1))


def trivial_povm(d, weights):
    w = np.asarray(weights, dtype=float)
    return DiscretePOVM(w[:, None, None] * np.eye(d)[None], None)


def unsharp_spin_povm(theta, sharpness, phi=0.0):
    """``{(I +- gamma n.sigma)/2}``, the spin PVM smeared towards I/2."""
    pvm = spin_pvm(theta, phi)
    return DiscretePOVM(sharpness * pvm.effects + (1 - sharpness) * linalg.I2 / 2, (1, -1))


def _check_dim(rho, povm):
    if rho.dim != povm.dim:
        raise DimensionError(f"state dimension {rho.dim} != measurement dimension {povm.dim}")


def probabilities(rho, povm):
    """Outcome probabilities ``p_m = Tr(rho M_m)``."""
    rho = as_density(rho)
    _check_dim(rho, povm)
    p = np.einsum("ij,kji->k", rho.matrix, povm.effects).real
    if p.min() < -TOL or p.max() > 1 + TOL:
        raise InvalidMeasurementError(f"probabilities out of range: {p}")
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1) > 1e-9:
        raise InvalidMeasurementError(f"probabilities sum to {p.sum()!r}")
    return p


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Object-apparatus interaction: ``rho_a``, unitary ``U``, pointer PVM."""

    apparatus_initial: DensityOperator
    interaction: np.ndarray
    pointer_pvm: DiscretePVM

    def __post_init__(self):
        rho_a = as_density(self.apparatus_initial)
        u = linalg.as_square(self.interaction, "interaction")
        if not linalg.is_unitary(u, TOL):
            raise InvalidMeasurementError("interaction is not unitary")
        if self.pointer_pvm.dim != rho_a.dim:
            raise DimensionError("pointer PVM must act on the apparatus space")
        if u.shape[0] % rho_a.dim:
            raise DimensionError("interaction size is not a multiple of the apparatus dimension")
        object.__setattr__(self, "apparatus_initial", rho_a)
        object.__setattr__(self, "interaction", u)

    @property
    def apparatus_dim(self):
        return self.apparatus_initial.dim

    def pointer_statistics(self, rho):
        """Directly simulated pointer distribution ``Tr[(rho (x) rho_a) U^+ (I (x) E_m) U]``."""
        rho = as_density(rho)
        u = self.interaction
        joint = u @ np.kron(rho.matrix, self.apparatus_initial.matrix) @ linalg.dag(u)
        eye = np.eye(rho.dim)
        return np.array([np.trace(joint @ np.kron(eye, e)).real for e in self.pointer_pvm.effects])


def compile_povm(model, object_dim=None):
    """Object POVM ``M_m = Tr_a[(I (x) rho_a) U^+ (I (x) E_m) U]``.

    Effects are validated, never clipped: a negative eigenvalue below
    ``-1e-10`` means the model itself is broken.
    """
    da = model.apparatus_dim
    side = model.interaction.shape[0]
    if object_dim is None:
        object_dim = side // da
    if object_dim * da != side:
        raise DimensionError(f"object dim {object_dim} x apparatus dim {da} != {side}")
    u = model.interaction
    eye = np.eye(object_dim)
    left = np.kron(eye, model.apparatus_initial.matrix)
    effects = []
    for e in model.pointer_pvm.effects:
        heis = linalg.dag(u) @ np.kron(eye, e) @ u
        effects.append(linalg.partial_trace(left @ heis, (object_dim, da), keep=0))
    effects = np.array(effects)
    # Tr_a[(I x rho_a) X] is Hermitian only up to rounding; symmetrize before checks
    effects = (effects + linalg.dag(effects)) / 2
    return DiscretePOVM(effects, model.pointer_pvm.labels)


def sample(rho, povm, n, seed, stream="observables.sample"):
    """Draw ``n`` i.i.d. outcome labels.

    Returns a ``collectives.OutcomeSequence``.  The stream is reproducible
    for a fixed seed and independent of ``QMEAS_THREADS``.
    """
    from .collectives import OutcomeSequence

    if n < 1:
        raise ValueError("n must be positive")
    p = probabilities(rho, povm)
    idx = sample_indices(p, n, seed, stream)
    return OutcomeSequence(label_array(povm.labels)[idx])


def label_array(labels):
    """Numeric labels become a numeric array, anything else an object array."""
    if all(isinstance(x, (int, float, np.integer, np.floating)) for x in labels):
        return np.asarray(labels)
    arr = np.empty(len(labels), dtype=object)
    arr[:] = list(labels)
    return arr


def sample_indices(p, n, seed, stream):
    """Categorical draws by inverse CDF, chunked per the seed derivation scheme."""
    cdf = np.cumsum(p)
    cdf[-1] = 1.0

    def draw(rng, size):
        return np.searchsorted(cdf, rng.random(size), side="right")

    parts = _rng.map_chunks(draw, n, seed, stream)
    return np.concatenate(parts).astype(np.int64)


def uncertainty_product(rho, a, b):
    """Standard deviations of ``a`` and ``b`` and the bound ``|<[a, b]>|/2``."""
    rho = as_density(rho)
    a = linalg.check_hermitian(a, "A")
    b = linalg.check_hermitian(b, "B")
    if a.shape[0] != rho.dim or b.shape[0] != rho.dim:
        raise DimensionError("observables and state differ in dimension")
    m = rho.matrix

    def spread(op):
        mean = np.trace(m @ op).real
        shifted = op - mean * np.eye(rho.dim)
        return float(np.sqrt(max(np.trace(m @ shifted @ shifted).real, 0.0)))

    bound = abs(np.trace(m @ linalg.commutator(a, b))) / 2
    return spread(a), spread(b), float(bound)


def is_compatible(p, q, tol=TOL):
    """True iff every pair of effects commutes."""
    if p.dim != q.dim:
        raise DimensionError("measurements act on different dimensions")
    comm = np.einsum("aij,bjk->abik", p.effects, q.effects) - np.einsum(
        "bij,ajk->abik", q.effects, p.effects)
    return bool(np.linalg.norm(comm, axis=(2, 3)).max() <= tol)


def random_measurement_model(object_dim, apparatus_dim, rng):
    """Haar interaction, random mixed apparatus state, random pointer basis."""
    from .states import random_density

    u = linalg.random_unitary(object_dim * apparatus_dim, rng)
    rho_a = random_density(apparatus_dim, rng)
    basis = linalg.random_unitary(apparatus_dim, rng)
    return MeasurementModel(rho_a, u, DiscretePVM.from_basis(basis))
