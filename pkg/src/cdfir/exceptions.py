class ParameterError(ValueError):
    """Raised when a physical or design parameter is outside its domain."""


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


class NumericalError(RuntimeError):
    """Raised when a computation produces non-finite or degenerate results."""
