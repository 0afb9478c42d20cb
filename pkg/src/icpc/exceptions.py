"""Exception hierarchy.

Validation problems (bad parameters, malformed data, infeasible targets)
derive from :class:`ValidationError`; failures that happen while computing
(rank deficiency, unstable time steps) derive from :class:`NumericalError`.
The CLI maps the two families onto exit codes 1 and 2.
"""


class IcpcError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(IcpcError, ValueError):
    """Input failed validation before any computation ran."""


class NumericalError(IcpcError, RuntimeError):
    """A computation could not be carried out reliably."""


class ParameterError(ValidationError):
    """A model or configuration parameter is outside its domain."""


class InfeasibleError(ValidationError):
    """No admissible value attains the requested target."""


class DataError(ValidationError):
    """A dataset is malformed: missing columns, gaps, non-numeric cells."""


class RankError(NumericalError):
    """A design or weighting matrix is rank deficient."""


class StabilityError(NumericalError):
    """An explicit time step violates its stability condition."""
