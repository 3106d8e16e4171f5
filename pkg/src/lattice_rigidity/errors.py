"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation errors exit with 2,
precision errors with 3 and size caps with 4.
"""


class LatticeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LatticeError, ValueError):
    """Malformed or inconsistent input data."""


class ContextMismatch(ValidationError):
    pass


class NotPrime(ValidationError):
    pass


class AssociativityFailure(ValidationError):
    pass


class IdentityFailure(ValidationError):
    pass


class MultiplicativityFailure(ValidationError):
    pass


class NotSubgroup(ValidationError):
    pass


class NotStable(ValidationError):
    """A row span that is not closed under the order action."""


class NotUnit(LatticeError, ArithmeticError):
    pass


class PrecisionExhausted(LatticeError, ArithmeticError):
    """The working precision cannot certify the requested answer.

    Callers are expected to recompute at a higher precision (the CLI retries
    once at doubled precision).
    """


class StabilizationFailure(PrecisionExhausted):
    """Ext invariants did not stabilize below the precision cap."""


class CapExceeded(LatticeError):
    """A configured size cap (group order, dimension, enumeration) was hit."""


class GroupTooLarge(CapExceeded):
    pass


class SeparabilityUnverified(UserWarning):
    """The trace form determinant vanishes at the working precision."""
