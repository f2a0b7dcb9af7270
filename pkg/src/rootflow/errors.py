"""Exception types shared across the library."""


class RootflowError(Exception):
    """Base class for library-specific failures."""


class DomainError(RootflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RejectedInputError(RootflowError, ValueError):
    """Input data is malformed (non-finite samples, bad shapes, ...)."""


class ConstructionError(RootflowError, ValueError):
    """A value object cannot be built from the given data."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class DegenerateMeasureError(RootflowError, ValueError):
    """A measure with zero total mass cannot be normalized."""


class GrowthOverflowError(RootflowError, OverflowError):
    """A modal factor exp(k*t) left the representable range."""

    def __init__(self, mode: int, exponent: float):
        self.mode = mode
        self.exponent = exponent
        super().__init__(
            f"mode {mode} grows as exp({exponent:.3g}); beyond double range"
        )


class NumericalBreakdownError(RootflowError, ArithmeticError):
    """A solver produced non-finite intermediates."""

    def __init__(self, message: str, step_index: int | None = None):
        self.step_index = step_index
        if step_index is not None:
            message = f"{message} (at step {step_index})"
        super().__init__(message)


class StagnationError(RootflowError, ArithmeticError):
    """The adaptive time step collapsed below the useful range."""


class ConfigError(RootflowError, ValueError):
    """An experiment configuration is invalid."""
