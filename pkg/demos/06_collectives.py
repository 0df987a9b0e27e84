"""
Place selection and homogeneity of measurement sequences.

A sequence of outcomes is homogeneous if every selection rule that does
not look at the current value picks out a subsequence with the same
relative frequencies.

* i.i.d. draws: homogeneous under every rule.
* a proper mixture of |0> and |+> measured in the z basis: selecting on
  the preparation label changes the frequencies (1 vs 1/2), so it is not.
* the improper mixture of particle 2 of a singlet: selecting on the
  partner's outcome at angle pi/4 also changes the frequencies.  When the
  partner is measured along the same axis the label is a copy of the value,
  and the rule is reported as degenerate instead.

Run: python3 demos/06_collectives.py
"""
import numpy as np

from qmeas import collectives as col, observables as ob, states

z = ob.computational_pvm(2)
n = 100_000


def report(name, seq, rules):
    rep = col.homogeneity_test(seq, rules)
    print(f"{name}  (critical |z| = {rep.critical_z:.2f})")
    for r in rep.rows:
        print(f"    {r.rule:16s} outcome {r.outcome!s:>2}: full {r.freq_full:.4f} "
              f"sub {r.freq_sub:.4f} z {r.z:+8.2f}  {r.verdict}")


report("i.i.d.", col.iid_sequence([0.5, 0.5], n, seed=1),
       [col.EveryKth(2), col.SideLabel(0), col.PreviousValue(1)])

preps = [np.diag([1.0, 0.0]), np.full((2, 2), 0.5)]
report("proper mixture", col.generate_proper_mixture(preps, [0.5, 0.5], z, n, seed=2),
       [col.SideLabel(0), col.EveryKth(3)])

_, second = col.generate_epr_sequences(states.singlet(), ob.spin_pvm(np.pi / 4), z, n, seed=3)
report("singlet, partner at pi/4", second, [col.SideLabel(1), col.SideLabel(-1)])

_, second = col.generate_epr_sequences(states.singlet(), z, z, n, seed=4)
report("singlet, partner along z", second, [col.SideLabel(0)])
