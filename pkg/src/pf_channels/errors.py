"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`PFError`,
so callers (and the CLI) can separate bad input from programming bugs.
"""


class PFError(Exception):
    """Base class for library errors."""


class DimensionMismatch(PFError, ValueError):
    pass


class NotHermitian(PFError, ValueError):
    pass


class NotPSD(PFError, ValueError):
    pass


class NotTracePreserving(PFError, ValueError):
    def __init__(self, residual, msg=None):
        self.residual = float(residual)
        super().__init__(msg or f"sum K_i^* K_i deviates from identity by {self.residual:.3e}")


class ChoiNotReal(PFError, ValueError):
    """Choi matrix has a non-negligible imaginary part, so the map cannot be PF."""

    def __init__(self, max_imag, location=None):
        self.max_imag = float(max_imag)
        self.location = location
        super().__init__(
            f"Choi matrix is not real (max |imag| = {self.max_imag:.3e} at {location})"
        )


class DimensionTooLarge(PFError, ValueError):
    pass


class FrameNotResolution(PFError, ValueError):
    pass


class FrameNotInCone(PFError, ValueError):
    def __init__(self, index, entry, value):
        self.index = index
        self.entry = entry
        self.value = float(value)
        super().__init__(
            f"frame vector {index} is outside NC(K): K(v) has entry {entry} = {self.value:.6g}"
        )


class WrongRank(PFError, ValueError):
    pass


class InvariantViolation(PFError, RuntimeError):
    """Internal consistency failure. Indicates a bug, not bad input."""


class InvalidWitness(PFError, ValueError):
    pass


class LambdaOutOfRange(PFError, ValueError):
    pass


class NotCorrelation(PFError, ValueError):
    pass


class NotUnitVector(PFError, ValueError):
    pass


class TooManyVectors(PFError, ValueError):
    pass


class ZeroVector(PFError, ValueError):
    pass


class WrongSize(PFError, ValueError):
    pass
