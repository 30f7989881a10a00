"""Exception types shared across the package."""


class LatticeRabiError(Exception):
    """Base class for all package errors."""


class DomainError(LatticeRabiError, ValueError):
    """A parameter is outside its mathematical domain."""


class ConfigurationError(LatticeRabiError, ValueError):
    """A grid / scenario configuration violates a sizing or validation rule."""


class UsageError(LatticeRabiError, ValueError):
    """Incompatible objects were combined (e.g. states on different grids)."""


class ConversionError(LatticeRabiError, ValueError):
    """A basis conversion lost more probability than allowed."""


class NumericalFault(LatticeRabiError, RuntimeError):
    """A propagator produced non-finite amplitudes."""
