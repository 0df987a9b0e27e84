"""
CHSH for quantum, instantaneous and contextual hidden-variable models.

The CHSH value of the singlet at angles (0, pi/2; pi/4, 3pi/4) is 2 sqrt 2.
A hidden-variable model in which one lambda fixes the response to all
four settings at once defines a joint distribution of the four outcomes,
so it obeys |S| <= 2 and the table passes the joint-distribution test.

If instead the distribution of lambda depends on which pair of settings is
measured (here: density proportional to |a . lambda|), each pair may get
its own lambda and the model reproduces E = -cos(theta) exactly.

Run: python3 demos/05_bell_and_contextual_models.py
"""
import numpy as np

from qmeas import states, subquantum as sq

labels = ("a1", "b1", "a2", "b2")
angles = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)
n = 10 ** 6


def show(name, table):
    res = sq.joint_distribution_exists(table)
    e = ", ".join(f"{p}={v:+.4f}" for p, v in zip(sq.PAIR_NAMES, table.correlators()))
    print(f"{name:24s} S = {sq.chsh_value(table):.4f} +- {sq.chsh_sigma(table):.4f}  "
          f"joint distribution: {res.feasible}\n    {e}")


show("singlet (exact)", sq.quantum_correlation_table(states.singlet(), sq.chsh_settings(angles)))
show("sphere model", sq.hv_correlation_table(sq.noncontextual_sphere_model(angles), labels, n, seed=1))
show("contextual model", sq.trajectory_correlation(
    sq.contextual_reference_model(dict(zip(labels, angles))), labels, n, seed=2))

rng = np.random.default_rng(5)
worst = max(sq.chsh_value(sq.hv_correlation_table(sq.random_hv_model(rng), labels, 100_000, seed=k))
            for k in range(20))
print("largest |S| over 20 random instantaneous models:", round(worst, 4))

# mixtures of PR boxes are no-signalling but have no joint distribution
pr = sq.random_nosignaling_table(rng, pr_weight=1.0)
print("PR-box mixture: S =", sq.chsh_value(pr), " joint distribution:", sq.joint_distribution_exists(pr).feasible)
