"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BudgetExceeded(RuntimeError):
    """A scan or construction would exceed its configured operation budget."""

    def __init__(self, message, *, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class BoundOverflow(OverflowError):
    """A log-space bound is too large to be stored as a finite float."""


class InsufficientLength(RuntimeError):
    """A connected sequence is too short for the commensurate construction."""

    def __init__(self, message, *, first_uncovered):
        super().__init__(message)
        self.first_uncovered = first_uncovered


class ModelError(RuntimeError):
    """A user-supplied model callable failed."""
