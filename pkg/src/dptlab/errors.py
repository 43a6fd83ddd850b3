"""Exception hierarchy shared by all dptlab modules."""


class DptlabError(Exception):
    """Base class for every error raised by dptlab."""


class InvalidCutoffError(DptlabError, ValueError):
    pass


class DimensionError(DptlabError, ValueError):
    pass


class InvalidStateError(DptlabError, ValueError):
    """A matrix failed the density-matrix invariants."""


class InsufficientCutoffError(DptlabError):
    """The truncated Fock space cannot hold the requested state."""


class MemoryBoundError(DptlabError):
    """A dense allocation would exceed the configured memory bound."""


class NotBlockDiagonalError(DptlabError):
    """The generator leaks across symmetry sectors."""


class DegenerateSteadyStateError(DptlabError):
    def __init__(self, dimension, message=None):
        self.dimension = dimension
        super().__init__(message or f"steady-state null space has dimension {dimension}")


class NormalizationError(DptlabError):
    pass


class NumericalError(DptlabError):
    pass


class StiffnessError(NumericalError):
    pass


class CutoffTooSmallError(DptlabError):
    pass


class NonConvergenceError(DptlabError):
    pass


class ConfigError(DptlabError, ValueError):
    pass
