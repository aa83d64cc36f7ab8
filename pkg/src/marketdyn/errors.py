"""Exception types shared across the package.

Plain ValueError is used for programming/argument errors (bad shapes,
out-of-range scalars). The types below mark failures that the CLI maps
to distinct exit codes.
"""


class ConfigError(Exception):
    """Invalid run configuration: bad flag value, inconsistent constraint
    setup, malformed coefficient file."""


class DataError(Exception):
    """Invalid observed data: malformed CSV row, non-monotonic labels,
    missing input sample, window too short."""


class UnsupportedDimensionError(ValueError):
    """Raised by analyses that are only defined for the two-strategy case."""
