"""Exception types shared across the package."""


class QharmlabError(Exception):
    """Base class for all package errors."""


class CoincidentPointsError(QharmlabError):
    """Kernel evaluated on the singular diagonal x = y."""


class UnsupportedRegimeError(QharmlabError):
    """Parameter combination outside the implemented (d, alpha) regimes."""


class OutOfDomainError(QharmlabError):
    """Point lies outside the domain required by the operation."""


class WrongSideError(QharmlabError):
    """Point lies on the wrong side of a reflection hyperplane."""


class InvalidIndexError(QharmlabError):
    """Stability index outside the admissible range."""


class AsymmetricDomainError(QharmlabError):
    """Domain is not symmetric with respect to the reflection frame."""


class UnsupportedQuadratureError(QharmlabError):
    """No closed-form kernel is available for quadrature on this domain."""


class NoiseDominatedError(QharmlabError):
    """Monte Carlo noise exceeds the signal needed by a finite difference."""


class TailModelMissingError(QharmlabError):
    """Grid function has no declared exterior (far-field) model."""


class EmptyConeError(QharmlabError):
    """Lower-bound cone is empty for the requested base point."""


class ConvergenceFailureError(QharmlabError):
    """An iterative or direct solver failed to meet its tolerance."""


class ConfigError(QharmlabError):
    """Run configuration failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
