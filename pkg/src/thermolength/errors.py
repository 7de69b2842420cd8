"""Exception hierarchy.

Argument-type failures subclass :class:`ValueError` so callers that only
care about "bad input" can catch that; numerical breakdowns subclass
:class:`ArithmeticError`.
"""


class ThermoLengthError(Exception):
    """Base class for all package errors."""


class DimensionError(ThermoLengthError, ValueError):
    pass


class ArgumentError(ThermoLengthError, ValueError):
    pass


class NumericError(ThermoLengthError, ArithmeticError):
    """Non-finite values or a quadrature that failed to settle."""

    def __init__(self, message, where=None, delta=None):
        super().__init__(message)
        self.where = where
        self.delta = delta


class ConvergenceError(NumericError):
    def __init__(self, message, residual=None):
        super().__init__(message, delta=residual)
        self.residual = residual


class StabilityError(ThermoLengthError, ArithmeticError):
    """A drift matrix is not Hurwitz."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class PositivityError(ThermoLengthError, ValueError):
    """A matrix that must be positive definite is not."""


class RangeError(ThermoLengthError, ValueError):
    pass


class MonotonicityError(ThermoLengthError, ValueError):
    pass


class TopologyError(ThermoLengthError, ValueError):
    """A curve that must be closed is open."""


class CycleDirectionError(ThermoLengthError, ValueError):
    """The adiabatic work is non-negative, so the cycle is not an engine."""


class DegenerateCycleError(ThermoLengthError, ValueError):
    """The thermodynamic length vanishes."""


class ConsistencyError(ThermoLengthError, ArithmeticError):
    """An internal identity (symmetry, PSD, reality) failed beyond tolerance."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class TruncationError(ThermoLengthError, ArithmeticError):
    def __init__(self, message, tail_mass=None, suggested_n_max=None):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.suggested_n_max = suggested_n_max


class ConfigError(ThermoLengthError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
