"""Exception hierarchy shared across the package."""


class ClothoidArmError(Exception):
    """Base class for all package errors."""


class ConfigError(ClothoidArmError, ValueError):
    """Invalid parameters or settings."""


class DomainError(ClothoidArmError, ValueError):
    """Arc-length query outside [0, L]."""


class InfeasibleBoundary(ClothoidArmError, ValueError):
    """Boundary chord is longer than the curve length."""


class NumericalError(ClothoidArmError, RuntimeError):
    """Base class for numerical failures (exit code 3 on the CLI)."""


class NoConvergence(NumericalError):
    """Iterative method hit its iteration cap."""


class DegenerateFit(NumericalError):
    """Too few samples for the requested polynomial degree."""


class DataError(ClothoidArmError, ValueError):
    """Bad training data (NaN features, empty set)."""


class DivergenceError(NumericalError):
    """Training loss became non-finite."""


class RoleMismatch(ClothoidArmError, ValueError):
    """Model used for the wrong role or curvature order."""


class SchemaVersionMismatch(ClothoidArmError, ValueError):
    """File written with an unsupported schema version."""
