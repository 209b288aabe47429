"""Exception hierarchy shared across the toolkit.

The three fault classes map onto the CLI exit codes: data faults exit 2,
configuration faults exit 3, executor faults exit 4.
"""


class SymdelError(Exception):
    """Base class for all toolkit errors."""


class DataError(SymdelError):
    """Malformed or inconsistent input data (exit code 2)."""


class ConfigError(SymdelError):
    """Invalid run configuration (exit code 3)."""


class ExecutorError(SymdelError):
    """External executor misconfiguration or failure (exit code 4)."""
