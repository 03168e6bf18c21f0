"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed edge-list or serialization input."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DegenerateGramError(ValueError):
    """Every candidate is zero on the hold-out set; no Gram summary exists."""


class InfeasibleDegreeError(ValueError):
    """Requested expected average degree cannot be reached by the model."""


class UndefinedAUCError(ValueError):
    """AUC is undefined because the labels contain a single class."""
