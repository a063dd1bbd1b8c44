"""Exception types and advisory warnings shared across the package.

The hierarchy mirrors the three failure families surfaced by the command
line interface: bad arguments (usage), bad data (schema or dimension
problems), and numeric breakdown (singular systems, undefined statistics).
"""

from __future__ import annotations


class MultialignError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(MultialignError, ValueError):
    """A parameter is out of its admissible range or inconsistent."""


class InvalidDataError(MultialignError, ValueError):
    """Input data violates a schema, shape, or finiteness requirement."""


class NumericError(MultialignError, ArithmeticError):
    """A numeric operation is undefined or broke down (singularity, NaN)."""


class AdvisoryWarning(UserWarning):
    """Non-fatal condition worth surfacing (degenerate rank, truncation...)."""
