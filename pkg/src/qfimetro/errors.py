"""Exception hierarchy shared by every module of the package."""


class QFIError(Exception):
    """Base class for all errors raised by :mod:`qfimetro`."""


class DimensionMismatch(QFIError, ValueError):
    pass


class NonHermitianInput(QFIError, ValueError):
    pass


class NonSymmetricInput(QFIError, ValueError):
    pass


class NoConvergence(QFIError, ArithmeticError):
    pass


class NotPSD(QFIError, ValueError):
    pass


class OutOfRangeParameter(QFIError, ValueError):
    pass


class ZeroVector(QFIError, ValueError):
    pass


class RankTooLarge(QFIError, ValueError):
    pass


class TooManyTerms(QFIError, ValueError):
    pass


class InvalidState(QFIError, ValueError):
    """A matrix failed density-matrix validation.

    ``invariant`` names the violated condition (``"hermitian"``, ``"trace"``,
    ``"positivity"`` or ``"dims"``).
    """

    def __init__(self, message, invariant):
        super().__init__(message)
        self.invariant = invariant


class StateFileError(QFIError, ValueError):
    """A ``.qst`` file could not be parsed."""


class ANotQubit(QFIError, ValueError):
    pass


class ZeroInformation(QFIError, ValueError):
    """The probe carries no Fisher information about the phase."""


class NotSymmetric(QFIError, ValueError):
    pass


class DegenerateLikelihood(UserWarning):
    """Emitted when a Monte Carlo run produced a flat likelihood."""
