"""Exception types raised by bcmf.

Everything derives from :class:`BcmfError` so callers (and the CLI) can
catch domain problems separately from programming errors.
"""


class BcmfError(ValueError):
    """Base class for domain and precondition failures."""


class DomainError(BcmfError):
    """An argument lies outside the domain of the operation."""


class RangeError(BcmfError):
    """The parameter is outside the range where a construction exists."""


class PreconditionError(BcmfError):
    """A stated precondition (e.g. certified uniqueness) does not hold."""


class FiniteExpansionAmbiguous(BcmfError):
    """The greedy expansion of 1 terminates and no quasi-greedy form was requested."""


class NonConvergence(BcmfError):
    """A root bracket failed to contain a sign change."""
