"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on.

    ``field`` names the offending argument so callers (and the config
    validator) can report it without parsing the message.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DimensionError(ValueError):
    """Array lengths that must agree do not."""


class CoverageError(ValueError):
    """Behavior policy gives zero probability to an action the target policy takes."""


class SingularSystemError(ArithmeticError):
    """The Bellman linear system is singular or too ill-conditioned to trust."""


class NoAbsorptionError(ArithmeticError):
    """A chain expected to absorb does not do so with probability one."""


class BoundViolation(AssertionError):
    """A numerically checked inequality failed."""
