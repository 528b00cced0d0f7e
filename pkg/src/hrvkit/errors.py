"""Error types shared across the package."""


class HrvError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(HrvError, ValueError):
    """Operands have incompatible dimensions."""


class DomainError(HrvError, ValueError):
    """An argument is outside the operation's domain."""


class UnsupportedPairingError(HrvError, TypeError):
    """The (point, cone) or (generator, test set) pairing is not supported."""


class ConfigError(HrvError, ValueError):
    """A run configuration is invalid.  Carries every violation found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericFailureError(HrvError, RuntimeError):
    """A computation could not be carried out within its numeric contract."""


class AtomCapError(NumericFailureError):
    """Exact Prohorov computation refused: too many atoms."""
