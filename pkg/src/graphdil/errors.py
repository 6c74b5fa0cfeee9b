"""Exception hierarchy shared across the package.

Each error class carries the process exit code the CLI maps it to.
Plain ``ValueError`` is used for contract violations on function arguments
(bad shapes, out-of-range parameters); the classes below mark failures
that need a distinct exit status.
"""


class GraphDilError(Exception):
    """Base class for package-specific errors."""

    exit_code = 1


class ConfigError(GraphDilError):
    """Invalid or unparsable run configuration."""

    exit_code = 2


class DataError(GraphDilError):
    """Dataset or artifact files missing, malformed, or corrupted."""

    exit_code = 3


class NumericalError(GraphDilError):
    """A numerical routine failed (e.g. a factorization did not exist)."""

    exit_code = 4
