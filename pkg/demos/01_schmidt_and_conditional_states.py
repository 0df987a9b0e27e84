"""
Schmidt decomposition and conditionally prepared states.

Every bipartite pure state can be written as sum_i c_i |a_i>|b_i> with
orthonormal {a_i}, {b_i} and non-increasing c_i > 0.  Measuring particle 1
in the {a_i} basis and keeping only the runs with outcome i leaves
particle 2 in |b_i>.  Averaging those conditional states with weights
c_i^2 gives back the reduced density operator of particle 2, which is
the same operator whatever particle 1 was measured in.

Run: python3 demos/01_schmidt_and_conditional_states.py
"""
import numpy as np

from qmeas import epr, linalg, observables as ob, states

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(1)

psi = states.random_state((3, 3), rng)
sf = states.schmidt_decompose(psi)
print("Schmidt coefficients:", sf.coefficients)
print("sum of squares:      ", np.sum(sf.coefficients ** 2))

pvm = sf.left_pvm()
for i in range(sf.rank):
    rho2 = epr.conditionally_prepared_state(psi, pvm, i).matrix
    b = sf.right_basis[:, i]
    err = np.abs(rho2 - np.outer(b, b.conj())).max()
    print(f"outcome {i}: |rho_2|i - |b_i><b_i|| = {err:.1e}")

# a different measurement on particle 1 gives different conditional states,
# but their mixture is always the reduced state of particle 2
reduced = states.reduce(psi, keep=1).matrix
for name, p1 in [("Schmidt basis", pvm),
                 ("random basis", ob.DiscretePVM.from_basis(linalg.random_unitary(3, rng)))]:
    probs = epr.outcome_probabilities_first(psi, p1)
    mix = sum(p * epr.conditionally_prepared_state(psi, p1, i).matrix
              for i, p in enumerate(probs) if p > 1e-12)
    print(f"{name:14s}: mixture vs reduced state, max deviation {np.abs(mix - reduced).max():.1e}")

# the singlet has equal coefficients, so every basis is a Schmidt basis
print("singlet coefficients:", states.schmidt_decompose(states.singlet()).coefficients)
