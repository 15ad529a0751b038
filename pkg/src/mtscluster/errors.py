"""Exception hierarchy.

The CLI maps each family to its own exit code, so library code should raise
the most specific class that applies.
"""


class MtsClusterError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(MtsClusterError, ValueError):
    """Malformed or inconsistent input data or configuration."""

    exit_code = 3


class NumericalError(MtsClusterError, ArithmeticError):
    """A numerical contract (PSD, positivity, monotonicity) was violated."""

    exit_code = 4


class DegenerateClusteringError(MtsClusterError):
    """A clustering result is degenerate for the requested evaluation."""

    exit_code = 5
