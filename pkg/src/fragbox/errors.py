"""Error types shared across the library."""


class ArgumentError(ValueError):
    """A caller passed something out of range or malformed."""


class UnsupportedCaseError(NotImplementedError):
    """The inputs fall in a case the library deliberately does not handle."""


class ResourceBudgetError(RuntimeError):
    """A computation exceeded its enumeration or rejection budget."""


class ModelError(ValueError):
    """The model itself is degenerate (e.g. zero splitting rate)."""
