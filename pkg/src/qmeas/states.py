"""Pure states, density operators and bipartite (Schmidt) structure."""
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, InvalidStateError

NORM_TOL = 1e-10
RANK_TOL = 1e-10


def _normalize_dims(dims, total):
    if dims is None:
        return (total,)
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (1, 2) or any(d < 1 for d in dims):
        raise DimensionError(f"dims must be one or two positive integers, got {dims}")
    if int(np.prod(dims)) != total:
        raise DimensionError(f"dims {dims} do not multiply to {total}")
    return dims


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized state vector, optionally split into two subsystems."""

    amplitudes: np.ndarray
    dims: tuple = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0 or not np.all(np.isfinite(amps)):
            raise InvalidStateError("amplitudes must be finite and non-empty")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1) > NORM_TOL:
            raise InvalidStateError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", _normalize_dims(self.dims, amps.size))

    @classmethod
    def from_unnormalized(cls, amplitudes, dims=None):
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(a / np.linalg.norm(a), dims)

    @property
    def dim(self):
        return self.amplitudes.size

    def density(self):
        return density_from_pure(self)

    def coefficient_matrix(self):
        """Amplitudes arranged as ``c[i, j]`` for ``|i>|j>``."""
        if len(self.dims) != 2:
            raise DimensionError("state has no bipartite split")
        return self.amplitudes.reshape(self.dims)

    def __repr__(self):
        return f"StateVector(dims={self.dims}, amplitudes={np.round(self.amplitudes, 6)})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray
    dims: tuple = None

    def __post_init__(self):
        m = linalg.as_square(self.matrix, "density matrix")
        defect = linalg.hermiticity_defect(m)
        if defect > NORM_TOL:
            raise InvalidStateError(f"density matrix not Hermitian ({defect:.3e})")
        m = (m + linalg.dag(m)) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1) > NORM_TOL:
            raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
        low = float(np.linalg.eigvalsh(m)[0])
        if low < -NORM_TOL:
            raise InvalidStateError(f"density matrix has negative eigenvalue {low:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", _normalize_dims(self.dims, m.shape[0]))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)

    def expectation(self, op):
        return complex(np.trace(self.matrix @ op))

    def __repr__(self):
        return f"DensityOperator(dims={self.dims}, matrix=\n{np.round(self.matrix, 6)})"


def as_density(state, dims=None):
    """Accept a StateVector, DensityOperator or raw matrix."""
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, StateVector):
        return density_from_pure(state)
    return DensityOperator(state, dims)


def density_from_pure(v):
    """Projector ``|v><v|``."""
    if not isinstance(v, StateVector):
        v = StateVector(v)
    a = v.amplitudes
    return DensityOperator(np.outer(a, a.conj()), v.dims)


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """``|psi> = sum_i c_i |alpha_i>|beta_i>`` with ``c`` descending.

    ``left_basis``/``right_basis`` hold the vectors as columns.  When
    coefficients coincide (e.g. the singlet) the bases are fixed by the
    ``linalg`` phase convention; any unitary rotation inside a degenerate
    block gives an equally valid decomposition.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    dims: tuple

    @property
    def rank(self):
        return self.coefficients.size

    def reconstruct(self):
        amps = np.einsum("i,ai,bi->ab", self.coefficients, self.left_basis, self.right_basis)
        return StateVector(amps.reshape(-1), self.dims)

    def left_vectors(self):
        return [StateVector(self.left_basis[:, i]) for i in range(self.rank)]

    def right_vectors(self):
        return [StateVector(self.right_basis[:, i]) for i in range(self.rank)]

    def left_pvm(self):
        """PVM with the left Schmidt projectors (plus the complement, if any)."""
        from .observables import DiscretePVM

        return DiscretePVM.from_basis(self.left_basis, complete=True)

    def right_pvm(self):
        from .observables import DiscretePVM

        return DiscretePVM.from_basis(self.right_basis, complete=True)


def schmidt_decompose(v, dims=None):
    """Schmidt (polar) decomposition via the SVD of the coefficient matrix."""
    if not isinstance(v, StateVector):
        v = StateVector(v, dims)
    dims = tuple(dims) if dims is not None else v.dims
    if len(dims) != 2 or dims[0] * dims[1] != v.dim:
        raise DimensionError(f"cannot split a dimension-{v.dim} state as {dims}")
    linalg._check_dims(dims)
    U, s, V = linalg.svd(v.amplitudes.reshape(dims))
    keep = s > RANK_TOL
    # c_ij = sum_k s_k U_ik conj(V_jk)  ->  right vectors are conj(V)
    return SchmidtForm(s[keep], U[:, keep], V[:, keep].conj(), dims)


def schmidt_rank(v, dims=None):
    return schmidt_decompose(v, dims).rank


def reduce(rho, dims=None, keep=0):
    """Reduced density operator of subsystem ``keep`` (0 or 1)."""
    rho = as_density(rho)
    dims = tuple(dims) if dims is not None else rho.dims
    if len(dims) != 2:
        raise DimensionError("reduce needs a bipartite split")
    return DensityOperator(linalg.partial_trace(rho.matrix, dims, keep), (dims[keep],))


def overlap_up_to_phase(a, b):
    """``|<a|b>|`` for two vectors; 1 means equal as rays."""
    a = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    b = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    return float(abs(np.vdot(a, b)))


def basis_state(d, i):
    a = np.zeros(d, dtype=complex)
    a[i] = 1
    return StateVector(a)


def product_state(a, b):
    a = a if isinstance(a, StateVector) else StateVector(a)
    b = b if isinstance(b, StateVector) else StateVector(b)
    return StateVector(np.kron(a.amplitudes, b.amplitudes), (a.dim, b.dim))


def singlet():
    """``(|01> - |10>)/sqrt(2)``."""
    return StateVector(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))


def qubit_state(theta, phi=0.0):
    """Bloch-sphere pure state with polar angle ``theta``."""
    return StateVector([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def random_state(dims, rng):
    dims = tuple(dims) if np.iterable(dims) else (int(dims),)
    n = int(np.prod(dims))
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(z / np.linalg.norm(z), dims)


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ linalg.dag(g)
    return DensityOperator(m / np.trace(m).real)
