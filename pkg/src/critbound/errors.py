"""Exception types shared across the package.

The CLI maps each class to a fixed exit code, so library code raises these
rather than bare ValueError when a caller-facing contract is broken.
"""


class PreconditionError(ValueError):
    """An operation was called outside its domain.

    ``constraint`` names the violated inequality so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        self.constraint = constraint or message


class UndefinedArgumentError(PreconditionError):
    """The argument of 0 was requested."""


class NumericAbort(ArithmeticError):
    """A simulated state became non-finite."""

    def __init__(self, index: int, value: complex):
        super().__init__(f"non-finite state at n={index}: {value!r}")
        self.index = index
        self.value = value


class FamilyError(RuntimeError):
    """Evaluating an f or y family failed at a given step."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"family evaluation failed at n={index}: {cause}")
        self.index = index
        self.__cause__ = cause


class ConfigError(ValueError):
    """Malformed or unknown configuration."""
