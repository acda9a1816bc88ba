"""
Exceptions raised across the project.
"""


class DomainError(ValueError):
    """A parameter or argument lies outside the domain of an operation."""


class SeverityFormatError(DomainError):
    """
    A severity file could not be parsed.

    Parameters
    ----------
    path : string
        Path of the offending file.
    line_number : int
        1-based line number of the offending line.
    reason : string
        What is wrong with the line.
    """

    def __init__(self, path, line_number, reason):
        super(SeverityFormatError, self).__init__(
            "{}:{}: {}".format(path, line_number, reason)
        )
        self.path = path
        self.line_number = line_number


class ConvergenceError(RuntimeError):
    """An iteration or certified series did not converge within its cap."""


class BudgetExceededError(RuntimeError):
    """An enumeration or grid would exceed its configured budget."""


class GridBoundsError(IndexError):
    """Access outside the computed part of a recursion grid."""


class GenerationCapExceeded(RuntimeError):
    """
    A branching simulation accumulated more individuals than allowed.

    Parameters
    ----------
    cap : int
        The generation cap that was exceeded.
    n_exceeded : int
        Number of draws that exceeded the cap.
    """

    def __init__(self, cap, n_exceeded=1):
        super(GenerationCapExceeded, self).__init__(
            "{} draw(s) exceeded the cap of {} accumulated individuals.".format(
                n_exceeded, cap
            )
        )
        self.cap = cap
        self.n_exceeded = n_exceeded


class AccuracyError(RuntimeError):
    """A reported tail bound exceeds the requested accuracy."""
