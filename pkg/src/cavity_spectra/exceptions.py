"""Exception hierarchy shared by all modules."""


class CavitySpectraError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(CavitySpectraError, ValueError):
    pass


class NotAdmissibleError(CavitySpectraError, ValueError):
    """A permittivity sample failed the coercivity audit.

    Attributes
    ----------
    point : ndarray
        Coordinates of the offending sample.
    min_eigenvalue : float
        Smallest matrix eigenvalue found there.
    """

    def __init__(self, message, point=None, min_eigenvalue=None):
        super().__init__(message)
        self.point = point
        self.min_eigenvalue = min_eigenvalue


class NumericalError(CavitySpectraError):
    """Base for failures of a numerical procedure (CLI exit code 2)."""


class DefinitenessError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CoverageError(NumericalError):
    pass


class NeedsTauShiftError(NumericalError):
    pass


class TrackingError(NumericalError):
    pass


class NoSplitFoundError(NumericalError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(CavitySpectraError):
    """Configuration failed schema validation.

    ``pointer`` is the JSON pointer of the offending field.
    """

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer
