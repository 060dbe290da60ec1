"""Exception hierarchy shared by all gaplab modules."""


class GaplabError(Exception):
    """Base class for every error raised by gaplab."""


class NonInvertible(GaplabError):
    """Backward iteration requested on a non-invertible base map."""


class DimensionMismatch(GaplabError, ValueError):
    pass


class PrecisionExhausted(GaplabError):
    """A dyadic orbit would run out of tracked bits inside the requested window."""


class EmptyBlock(GaplabError, ValueError):
    pass


class NotGaugeReduced(GaplabError, ValueError):
    pass


class NonPositiveOffdiag(GaplabError, ValueError):
    pass


class EnergyTooCloseToBlockSpectrum(GaplabError, ValueError):
    pass


class SolutionHitsEigenvalue(GaplabError):
    """The Dirichlet-type solution has an exact lattice zero where none is allowed."""


class SingularCocycle(GaplabError):
    pass


class PreconditionViolated(GaplabError, ValueError):
    pass


class ConfigError(GaplabError, ValueError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
