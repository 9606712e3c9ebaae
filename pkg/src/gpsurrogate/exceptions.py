"""Exception types shared across the toolkit."""


class SurrogateError(Exception):
    """Base class for all errors raised by gpsurrogate."""


class DimensionMismatch(SurrogateError, ValueError):
    """Vector/matrix/point dimensions do not line up."""


class NotPositiveDefinite(SurrogateError):
    """Cholesky factorization hit a non-positive pivot.

    This is the canonical ill-conditioning signal: callers should respond
    by engaging the nugget policy, never by silently perturbing the matrix.
    """


class ConvergenceFailure(SurrogateError):
    """An iterative decomposition kernel failed to converge."""


class AllSingularValuesTruncated(SurrogateError):
    """Every singular value fell below the truncation threshold."""


class InvalidKappaMax(SurrogateError, ValueError):
    """Condition-number cap must be > 1."""


class UnsupportedNu(SurrogateError, ValueError):
    """Matern smoothness outside the implemented half-integer set."""


class DomainError(SurrogateError, ValueError):
    """Input outside the mathematical domain of an operation."""


class InvalidSize(SurrogateError, ValueError):
    """Design size arguments must be positive."""


class DegenerateBounds(SurrogateError, ValueError):
    """Scaling bounds with lo >= hi."""


class OutOfBounds(SurrogateError, ValueError):
    """Raw data outside the declared bounds (clipping is refused)."""


class InvalidLength(SurrogateError, ValueError):
    """Time-series length must be >= 2."""


class TooFewPoints(SurrogateError, ValueError):
    """Not enough training points to fit a model."""


class RankDeficientBasis(SurrogateError):
    """Universal-kriging basis matrix is not full column rank."""


class NumericalIntegrityError(SurrogateError):
    """A computed quantity violated its numerical sanity bound."""


class SchemaVersionMismatch(SurrogateError):
    """Model file written by an incompatible schema version."""


class CorruptFile(SurrogateError):
    """Model file is unreadable or structurally invalid."""


class AllZeroSpectrum(SurrogateError):
    """Singular-value spectrum is identically zero."""


class AlignmentError(SurrogateError, ValueError):
    """Response matrix columns do not align with the design rows."""


class NTooLarge(SurrogateError, ValueError):
    """Requested neighborhood size exceeds the dataset size."""


class EmptyCandidates(SurrogateError, ValueError):
    """Candidate set for an acquisition step is empty."""


class SimulatorFailure(SurrogateError):
    """A simulator run raised; partial sequential-design state is preserved.

    The failed run's state ledger is attached as the ``state`` attribute.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
