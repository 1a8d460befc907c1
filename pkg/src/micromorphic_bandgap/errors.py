"""Exception hierarchy.

Configuration problems, indefinite material data and numerical failures are
kept in separate branches so the command line can map them to exit codes.
"""

from __future__ import annotations


class MicromorphicError(Exception):
    """Base class for every error raised by this package."""


# -- configuration ---------------------------------------------------------


class ConfigError(MicromorphicError):
    pass


class ParseError(ConfigError):
    pass


class UnitError(ConfigError):
    pass


class ConsistencyError(ConfigError):
    pass


class MissingField(ConfigError):
    pass


# -- material data ---------------------------------------------------------


class IndefiniteParameters(MicromorphicError):
    """The parameter set violates at least one definiteness inequality."""


class NegativeRadicand(IndefiniteParameters):
    def __init__(self, name: str, value: float):
        super().__init__(f"negative radicand for {name}: {value!r}")
        self.name = name
        self.value = value


class InvalidOrdering(MicromorphicError, ValueError):
    pass


class DegenerateHomogenization(MicromorphicError, ValueError):
    pass


class OutsideStatedRegime(MicromorphicError, ValueError):
    """lambda_e or lambda_h is not strictly positive."""


# -- numerics --------------------------------------------------------------


class NumericalFailure(MicromorphicError):
    pass


class ComplexRootPair(NumericalFailure):
    pass


class NegativeSquaredFrequency(NumericalFailure):
    pass


class InsufficientSamples(NumericalFailure):
    pass


class CeilingTooLow(NumericalFailure):
    pass
