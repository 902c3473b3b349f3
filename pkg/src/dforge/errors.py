"""Exception types shared across the package."""


class DforgeError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class BaseMismatchError(DforgeError):
    pass


class CostGuardError(DforgeError):
    """A requested computation exceeds the configured term budget."""

    def __init__(self, terms: int, guard: int):
        super().__init__(
            f"computation needs {terms} terms, above the cost guard of {guard} "
            "(raise it with DFORGE_COST_GUARD)"
        )
        self.terms = terms
        self.guard = guard


class InternalConsistencyError(RuntimeError):
    """Two independent evaluation paths disagreed. Signals a bug, never bad input."""
