"""Exception hierarchy shared across the package.

Every error raised on purpose derives from EmbridgeError so callers can
catch one base class. The command line maps the three leaf categories to
distinct exit codes (input 2, consistency 3, convergence 4).
"""

from __future__ import annotations


class EmbridgeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(EmbridgeError):
    """Malformed file, unusable argument value, or missing input."""


class ParseError(InputError):
    """Input file violated its line format.

    Carries enough context (path and line number when known) to point a
    user at the offending line.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = path if path is not None else ""
        if line is not None:
            where += f" line {line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class ConsistencyError(EmbridgeError):
    """Inputs are individually valid but disagree with each other.

    Typical causes: embedding spaces of different dimension, an id present
    in a dictionary but absent from an embedding matrix.
    """


class ConvergenceError(EmbridgeError):
    """An iterative numerical routine exhausted its sweep budget."""
