"""Exception hierarchy shared by every qmeas module."""


class QMeasError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(QMeasError, ValueError):
    """Shapes do not line up, or a problem exceeds the supported size."""


class NotHermitianError(QMeasError, ValueError):
    pass


class InvalidStateError(QMeasError, ValueError):
    """Vector or density operator violates normalization/positivity."""


class InvalidMeasurementError(QMeasError, ValueError):
    """POVM, PVM or measurement model violates its invariants."""


class ZeroProbabilityError(QMeasError, ValueError):
    """Conditioning on an outcome that (numerically) never occurs."""


class InfeasibleDecompositionError(QMeasError):
    """An observed POVM is not a stochastic mixture of the target effects."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SequenceTooShortError(QMeasError, ValueError):
    pass


class TableError(QMeasError, ValueError):
    """Correlation table is malformed (wrong shape, not dichotomic...)."""
