"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters or an inconsistent configuration."""


class SingularPointError(ArithmeticError):
    """A potential was evaluated exactly at its singular point."""


class CorruptedStateError(RuntimeError):
    """A chain reached a state the proposal flow can never produce."""


class UnsupportedEstimatorError(ValueError):
    """The requested estimator is not defined for the given action."""
