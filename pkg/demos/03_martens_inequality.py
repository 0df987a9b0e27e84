"""
Joint nonideal measurement of incompatible observables.

sz and sx cannot be measured together sharply, but a single POVM R_mn can
have marginals that are noisy versions of both:

    sum_n R_mn = sum_m' lambda[m, m'] P_m',   sum_m R_mn = sum_n' mu[n, n'] Q_n'.

The entropies J(lambda), J(mu) measure the noise.  For any such joint
measurement J(lambda) + J(mu) >= -ln max Tr(P_m Q_n), which is ln 2 for
sz and sx.  Below we sweep the sharpness of a symmetric unsharp grid and
show the sum never drops under the bound; the sharp-plus-trivial corner
meets it exactly.

Run: python3 demos/03_martens_inequality.py
"""
import numpy as np

from qmeas import joint_nonideal as jn, observables as ob

z, x = ob.computational_pvm(2), ob.spin_pvm(np.pi / 2)
print("bound -ln max Tr(P Q) =", jn.martens_bound(z, x), " ln 2 =", np.log(2))

print(f"{'gamma':>8} {'J_lambda':>10} {'J_mu':>10} {'sum':>10}")
for gamma in np.linspace(0, 1 / np.sqrt(2), 6):
    rep = jn.verify_martens(jn.unsharp_spin_grid(gamma, gamma), z, x)
    print(f"{gamma:8.4f} {rep.j_lambda:10.6f} {rep.j_mu:10.6f} {rep.j_sum:10.6f}")

# the symmetric grid is only a valid POVM up to gamma = 1/sqrt(2)
try:
    jn.unsharp_spin_grid(0.8, 0.8)
except Exception as exc:
    print("gamma = 0.8:", type(exc).__name__)

rep = jn.verify_martens(jn.unsharp_spin_grid(1.0, 0.0), z, x)
print("sharp sz, trivial sx: J_sum =", rep.j_sum, "margin =", rep.margin)

lam = jn.verify_martens(jn.unsharp_spin_grid(1 / np.sqrt(2), 1 / np.sqrt(2)), z, x).lambda_fit
print("nonideality matrix at gamma = 1/sqrt(2):\n", lam.matrix.entries.round(4))

# sx cannot be a noisy version of sz
fit = jn.solve_nonideality(x, z)
print("sx as a mixture of sz effects: feasible =", fit.feasible, "residual =", round(fit.residual, 4))
