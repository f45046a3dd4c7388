"""Exception hierarchy shared by all qtrap modules."""


class QtrapError(Exception):
    """Base class for every error raised by qtrap."""


class IntegrationError(QtrapError):
    """Raised when the mode equation cannot be integrated."""


class NonCanonicalInitialConditions(IntegrationError, ValueError):
    pass


class ZeroCrossing(IntegrationError):
    pass


class StepFailure(IntegrationError):
    pass


class OutOfInterval(QtrapError, ValueError):
    pass


class ComplexLeak(QtrapError):
    """A quantity that must be real picked up an imaginary part."""


class NonCanonical(QtrapError, ValueError):
    """Bogoliubov coefficients violate |mu|^2 - |nu|^2 = 1."""


class DegenerateMoments(QtrapError):
    pass


class GridTooCoarse(QtrapError):
    pass


class TruncationTooSmall(QtrapError, ValueError):
    """Fock truncation is too small for the requested parameters."""


class Overflow(QtrapError, OverflowError):
    pass


class ConfigError(QtrapError, ValueError):
    pass
