"""Exception types shared across the package."""


class PhotonWFError(Exception):
    """Base class for all package errors."""


class ConfigError(PhotonWFError, ValueError):
    """Invalid parameters or configuration."""


class GridMismatchError(ConfigError):
    """Two objects were built on different frequency grids."""


class UnknownModeError(ConfigError, KeyError):
    """A mode label is not present in the state or network."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ZeroNormError(PhotonWFError, ValueError):
    """A state has vanishing norm (e.g. a symmetric amplitude with fermion statistics)."""


class NumericalGuardError(PhotonWFError, ArithmeticError):
    """A numerical resolution or truncation check failed."""


class TruncationError(NumericalGuardError):
    """The frequency grid cuts off too much spectral probability."""


class UndersampledWindowError(NumericalGuardError):
    """A detection window samples time too coarsely for the beat frequencies present."""
