"""Exception types raised across the package."""


class UDWError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(UDWError, ValueError):
    pass


class NotHermitianError(UDWError, ValueError):
    pass


class InvalidStateError(UDWError, ValueError):
    pass


class QuadratureError(UDWError, RuntimeError):
    """Spectral integrals failed the resolution-doubling convergence check."""


class TruncationError(UDWError, ValueError):
    """Fock truncation is too small for the requested field moments."""


class InvariantError(UDWError, RuntimeError):
    """A CPTP or unitarity invariant was violated beyond tolerance."""


class ConfigError(UDWError, ValueError):
    pass
