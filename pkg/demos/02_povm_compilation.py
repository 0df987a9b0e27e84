"""
Compiling a measurement model into a POVM.

A measurement is modelled as an interaction U between the object and an
apparatus prepared in rho_a, followed by reading a pointer PVM {E_m} on
the apparatus.  The object-side effect of pointer value m is

    M_m = Tr_a[(I (x) rho_a) U^dag (I (x) E_m) U],

and Tr(rho M_m) reproduces the pointer statistics for every object state.

With U = exp(-i theta sz (x) sy) and the apparatus in |0>, the apparatus
Bloch vector rotates about y by +-2 theta depending on the object's sz.
Reading the pointer along z cannot tell the two rotations apart, so the
compiled POVM is trivial.  Reading it along x can, and the object sees an
unsharp sz measurement with sharpness sin(2 theta).

Run: python3 demos/02_povm_compilation.py
"""
import numpy as np

from qmeas import linalg, observables as ob, states

np.set_printoptions(precision=4, suppress=True)

theta = np.pi / 8
u = linalg.unitary_from_hermitian(np.kron(linalg.SIGMA_Z, linalg.SIGMA_Y), theta)
apparatus = np.diag([1.0, 0.0])

for name, pointer in [("z pointer", ob.computational_pvm(2)), ("x pointer", ob.spin_pvm(np.pi / 2))]:
    povm = ob.compile_povm(ob.MeasurementModel(apparatus, u, pointer), 2)
    print(name)
    for label, effect in zip(povm.labels, povm.effects):
        print(f"  M[{label}] =\n{effect.real}")
    print("  compatible with sz:", ob.is_compatible(povm, ob.computational_pvm(2)))
print("expected sharpness sin(2 theta) =", np.sin(2 * theta))

# a random model: compiled POVM against brute-force pointer statistics
rng = np.random.default_rng(2)
model = ob.random_measurement_model(3, 4, rng)
rho = states.random_density(3, rng)
povm = ob.compile_povm(model)
print("random model, compiled:", ob.probabilities(rho, povm))
print("random model, pointer: ", model.pointer_statistics(rho))

# sampling reproduces the probabilities
seq = ob.sample(rho, povm, 200_000, seed=7)
print("sampled frequencies:   ", np.bincount(seq.values, minlength=len(povm)) / len(seq))
