"""EPR correlations, conditional preparation and contextual states."""
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, ZeroProbabilityError
from .observables import DiscretePVM
from .states import DensityOperator, StateVector, as_density

MIN_PROBABILITY = 1e-12


@dataclass(frozen=True, eq=False)
class EPRScenario:
    """Bipartite pure state with one PVM per particle."""

    state: StateVector
    first_observable: DiscretePVM
    second_observable: DiscretePVM

    def __post_init__(self):
        dims = self.state.dims
        if len(dims) != 2:
            raise DimensionError("EPR scenario needs a bipartite state")
        if self.first_observable.dim != dims[0] or self.second_observable.dim != dims[1]:
            raise DimensionError(
                f"observables of dims ({self.first_observable.dim}, "
                f"{self.second_observable.dim}) do not fit state dims {dims}")


def _local_projectors(state, a, b):
    """``(P_i (x) Q_j) |psi>`` for every outcome pair, shape (I, J, d1*d2)."""
    psi = state.amplitudes.reshape(state.dims)
    out = np.einsum("iab,jcd,bd->ijac", a.effects, b.effects, psi)
    return out.reshape(len(a), len(b), -1)


def joint_probability(s):
    """Grid ``p[i, j] = <psi| P_i (x) Q_j |psi>``."""
    proj = _local_projectors(s.state, s.first_observable, s.second_observable)
    grid = np.einsum("ijk,k->ij", proj, s.state.amplitudes.conj()).real
    grid = np.clip(grid, 0.0, None)
    return grid / grid.sum()


def conditional_probability(grid, condition_outcome):
    """Distribution of the second particle's outcome given row ``condition_outcome``."""
    grid = np.asarray(grid, dtype=float)
    row = grid[condition_outcome]
    marginal = row.sum()
    if marginal <= MIN_PROBABILITY:
        raise ZeroProbabilityError(f"outcome {condition_outcome} has probability {marginal:.3e}")
    return row / marginal


def conditionally_prepared_state(state, first_pvm, outcome):
    """State of particle 2 in the subensemble where particle 1 gave ``outcome``.

    ``Tr_1[(P_i (x) I) |psi><psi| (P_i (x) I)] / p_i``; nothing about the
    Schmidt structure is assumed.
    """
    d1, d2 = state.dims
    if first_pvm.dim != d1:
        raise DimensionError("first PVM does not act on particle 1")
    psi = state.amplitudes.reshape(d1, d2)
    projected = first_pvm.effects[outcome] @ psi
    rho2 = projected.T @ projected.conj()
    p = float(np.trace(rho2).real)
    if p <= MIN_PROBABILITY:
        raise ZeroProbabilityError(f"outcome {outcome} has probability {p:.3e}")
    return DensityOperator(rho2 / p)


def outcome_probabilities_first(state, first_pvm):
    d1, d2 = state.dims
    psi = state.amplitudes.reshape(d1, d2)
    return np.array([np.linalg.norm(p @ psi) ** 2 for p in first_pvm.effects])


def contextual_state(rho, pvm):
    """``rho_A = sum_m P_m rho P_m``."""
    rho = as_density(rho)
    if rho.dim != pvm.dim:
        raise DimensionError("state and PVM differ in dimension")
    m = np.einsum("kij,jl,klm->im", pvm.effects, rho.matrix, pvm.effects)
    return DensityOperator(m, rho.dims)


def two_particle_contextual_state(state, a, b):
    """Contextual state of the pair in the context of measuring ``a (x) b``."""
    rho = as_density(state)
    dims = rho.dims
    if len(dims) != 2 or a.dim != dims[0] or b.dim != dims[1]:
        raise DimensionError("local PVMs do not match the bipartite split")
    locals_ = np.array([linalg.tensor_product(p, q) for p in a.effects for q in b.effects])
    labels = [(x, y) for x in a.labels for y in b.labels]
    joint = DiscretePVM(locals_, labels)
    return contextual_state(rho, joint)


@dataclass(frozen=True)
class EPRReport:
    joint: np.ndarray
    first_marginal: np.ndarray
    conditionals: dict
    prepared_states: dict
    contextual_pair: DensityOperator
    contextual_first: DensityOperator
    contextual_second: DensityOperator


def analyze(s):
    """Everything the ``epr`` experiment reports for one scenario."""
    from .states import reduce

    grid = joint_probability(s)
    first = grid.sum(axis=1)
    conditionals, prepared = {}, {}
    for i, label in enumerate(s.first_observable.labels):
        if first[i] > MIN_PROBABILITY:
            conditionals[label] = conditional_probability(grid, i)
            prepared[label] = conditionally_prepared_state(s.state, s.first_observable, i)
    rho = as_density(s.state)
    pair = two_particle_contextual_state(s.state, s.first_observable, s.second_observable)
    return EPRReport(
        grid, first, conditionals, prepared, pair,
        contextual_state(reduce(rho, keep=0), s.first_observable),
        contextual_state(reduce(rho, keep=1), s.second_observable),
    )
