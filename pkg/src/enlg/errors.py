"""Exception hierarchy.

The command-line front end maps each class onto a fixed exit code.
"""


class EnlgError(Exception):
    """Base class for every error raised by this package."""


class InputError(EnlgError, ValueError):
    """Malformed input: wrong shapes, unknown keys, unparsable files."""


class InvariantError(EnlgError, ValueError):
    """Well-formed input that violates a mathematical invariant."""


class SolverError(EnlgError, RuntimeError):
    """An SDP solve did not reach an optimal certificate."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class SizeCapError(EnlgError, ValueError):
    """A problem would exceed a configured size or enumeration cap."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap
