"""
Contextual states and EPR correlations.

Within the context of measuring a PVM {P_m}, a state rho is described by
rho_A = sum_m P_m rho P_m.  It gives the same outcome probabilities for
that measurement, is left unchanged by a second application, and commutes
with the observable.  For two particles measured locally, the contextual
state of the pair restricted to particle 1 only depends on what is done
to particle 1.

Run: python3 demos/04_contextual_states.py
"""
import numpy as np

from qmeas import epr, linalg, observables as ob, states

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(4)

rho = states.random_density(3, rng)
pvm = ob.DiscretePVM.from_basis(linalg.random_unitary(3, rng))
ctx = epr.contextual_state(rho, pvm)
print("p(rho):  ", ob.probabilities(rho, pvm))
print("p(rho_A):", ob.probabilities(ctx, pvm))
print("idempotent:", np.allclose(epr.contextual_state(ctx, pvm).matrix, ctx.matrix))
print("purity before / after:", rho.purity(), ctx.purity())

# singlet correlations E(theta) = -cos(theta)
z = ob.computational_pvm(2)
print(f"{'theta':>8} {'E':>9} {'-cos':>9}")
for theta in np.linspace(0, np.pi, 5):
    grid = epr.joint_probability(epr.EPRScenario(states.singlet(), z, ob.spin_pvm(theta)))
    e = grid[0, 0] - grid[0, 1] - grid[1, 0] + grid[1, 1]
    print(f"{theta:8.4f} {e:9.5f} {-np.cos(theta):9.5f}")

# locality of the pair context: changing particle 2's measurement does not
# change what the pair context says about particle 1
psi = states.random_state((2, 2), rng)
a = ob.spin_pvm(0.3)
for b in (z, ob.spin_pvm(1.2)):
    pair = epr.two_particle_contextual_state(psi, a, b)
    print("particle-1 part of pair context:\n", states.reduce(pair, keep=0).matrix.real)
