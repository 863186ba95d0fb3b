"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, ValidationError -> 2,
NumericalError -> 3.
"""


class ConfigError(Exception):
    """Malformed configuration file or command line."""


class ValidationError(ValueError):
    """An input violates a documented invariant (bad parameters, basis mismatch)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, positivity breach, tail overflow)."""
