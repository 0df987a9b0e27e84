"""Generalized quantum measurement toolkit.

Finite-dimensional states and POVMs, joint nonideal measurements with their
entropic trade-off, EPR conditional preparation versus contextual states,
hidden-variable Bell analysis and von Mises homogeneity tests.
"""
__version__ = "0.1.0"

from .errors import (DimensionError, InfeasibleDecompositionError,  # noqa: F401
                     InvalidMeasurementError, InvalidStateError, NotHermitianError,
                     QMeasError, SequenceTooShortError, TableError, ZeroProbabilityError)
from .states import (DensityOperator, SchmidtForm, StateVector,  # noqa: F401
                     density_from_pure, reduce, schmidt_decompose, singlet)
from .observables import (DiscretePOVM, DiscretePVM, MeasurementModel,  # noqa: F401
                          compile_povm, is_compatible, probabilities, sample, spin_pvm,
                          uncertainty_product)
