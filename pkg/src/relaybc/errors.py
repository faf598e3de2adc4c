"""Exception types raised by the solver and the simulation harness."""


class RelayBcError(Exception):
    """Base class for all package errors."""


class ConfigError(RelayBcError, ValueError):
    """Invalid system configuration (antenna counts, powers, weights)."""


class GeometryError(ConfigError):
    """A node distance required by the path-loss model is not positive."""


class DimensionMismatch(RelayBcError, ValueError):
    """Matrix operands with incompatible shapes."""


class FactorizationFailure(RelayBcError):
    """A matrix expected to be Hermitian positive definite is not."""


class BracketFailure(RelayBcError):
    """The multiplier bisection could not establish a usable bracket."""


class DegenerateChannel(RelayBcError):
    """A closed-form beamformer came out identically zero."""


class EmptyInput(RelayBcError, ValueError):
    """An aggregation was asked to summarize zero rows."""
