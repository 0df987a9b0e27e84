"""JSON encodings of states, observables and measurement models.

Complex numbers are written as ``[re, im]``; plain numbers are accepted on
input.  Matrices are nested row-major lists of such entries.
"""
import numpy as np

from .joint_nonideal import BivariatePOVM
from .observables import DiscretePOVM, DiscretePVM, MeasurementModel, spin_pvm
from .states import DensityOperator, StateVector


def complex_from_json(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"not a number: {x!r}")
    return complex(float(x))


def complex_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def matrix_from_json(rows):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a non-empty list of rows")
    m = np.array([[complex_from_json(x) for x in row] for row in rows], dtype=complex)
    if m.ndim != 2:
        raise ValueError("matrix rows have unequal lengths")
    return m


def matrix_to_json(m):
    return [[complex_to_json(x) for x in row] for row in np.asarray(m)]


def state_from_json(obj):
    """``{"dims": [...], "amplitudes": [...]}`` or ``{"dims": ..., "matrix": ...}``.

    ``"normalize": true`` rescales an unnormalized vector.
    """
    dims = obj.get("dims")
    if "amplitudes" in obj:
        amps = np.array([complex_from_json(x) for x in obj["amplitudes"]])
        if obj.get("normalize"):
            return StateVector.from_unnormalized(amps, dims)
        return StateVector(amps, dims)
    if "matrix" in obj:
        return DensityOperator(matrix_from_json(obj["matrix"]), dims)
    if obj.get("named") == "singlet":
        from .states import singlet

        return singlet()
    raise ValueError("state needs 'amplitudes', 'matrix' or 'named'")


def state_to_json(state):
    if isinstance(state, StateVector):
        return {"dims": list(state.dims), "amplitudes": [complex_to_json(a) for a in state.amplitudes]}
    return {"dims": list(state.dims), "matrix": matrix_to_json(state.matrix)}


def povm_from_json(obj, pvm=False):
    """``{"labels": [...], "effects": [matrix, ...]}``; also ``{"spin_angle": t}``."""
    cls = DiscretePVM if pvm else DiscretePOVM
    if "spin_angle" in obj:
        p = spin_pvm(float(obj["spin_angle"]), float(obj.get("azimuth", 0.0)))
        return p if pvm else DiscretePOVM(p.effects, p.labels)
    if "basis" in obj:
        vecs = np.array([[complex_from_json(x) for x in v] for v in obj["basis"]]).T
        return DiscretePVM.from_basis(vecs, obj.get("labels"))
    effects = np.array([matrix_from_json(e) for e in obj["effects"]])
    return cls(effects, obj.get("labels"))


def povm_to_json(povm):
    return {"labels": list(povm.labels), "effects": [matrix_to_json(e) for e in povm.effects]}


def measurement_model_from_json(obj):
    rho_a = obj["apparatus_initial"]
    rho_a = state_from_json(rho_a) if isinstance(rho_a, dict) else DensityOperator(matrix_from_json(rho_a))
    return MeasurementModel(rho_a, matrix_from_json(obj["unitary"]),
                            povm_from_json(obj["pointer_pvm"], pvm=True))


def bivariate_from_json(obj):
    effects = np.array([[matrix_from_json(e) for e in row] for row in obj["effects"]])
    return BivariatePOVM(effects, obj.get("row_labels"), obj.get("col_labels"))


def bivariate_to_json(r):
    return {
        "row_labels": list(r.row_labels),
        "col_labels": list(r.col_labels),
        "effects": [[matrix_to_json(e) for e in row] for row in r.effects],
    }
