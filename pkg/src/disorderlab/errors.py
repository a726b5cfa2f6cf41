"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: config errors exit 2,
numeric precondition failures exit 3, solver failures exit 4.
"""


class DisorderLabError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DisorderLabError):
    """Invalid or unknown configuration (schema violation, bad field)."""


class PreconditionError(DisorderLabError):
    """A numeric precondition was violated (box exit, boundary leakage...)."""


class ResourceError(DisorderLabError):
    """A configured resource budget (grid memory) would be exceeded."""


class SolverError(DisorderLabError):
    """An eigensolver failed after retries."""
