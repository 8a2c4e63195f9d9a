"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: data problems exit 2, fit and
saturation problems exit 3.
"""

from __future__ import annotations


class PerishabilityError(Exception):
    """Base class for all toolkit errors."""


class DataError(PerishabilityError):
    """Bad or insufficient input data."""


class CorpusFormatError(DataError):
    """The flat corpus stream violates the record format."""


class InsufficientDataError(DataError):
    """A period cannot fill its required splits or ladder."""


class BackendMismatchError(DataError):
    """Records from different backends were mixed in one analysis."""


class FitError(PerishabilityError):
    """A curve or regression fit could not be produced."""


class DegenerateFitError(FitError):
    """The data do not describe a decreasing learning curve."""


class SaturationError(FitError):
    """A loss at or below the fitted irreducible floor cannot be inverted."""
