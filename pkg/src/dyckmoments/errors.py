"""Exception hierarchy shared by all modules."""


class DyckMomentsError(Exception):
    """Base class for all library errors."""


class ValidationError(DyckMomentsError):
    """Invalid argument combination (CLI exit code 2)."""


class DomainError(DyckMomentsError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DyckMomentsError):
    """Evaluation at (or numerically indistinguishable from) a pole."""


class HalfPointError(PoleError):
    """p = 1/2 requested where the moment recursions are singular.

    Routable: the CLI maps this to the limit-half workflow.
    """


class ConvergenceError(DyckMomentsError):
    """A series/iteration failed to reach the requested tolerance."""


class ExtrapolationUnstable(ConvergenceError):
    """Successive extrapolation levels disagree beyond their error estimate."""


class DerivativeUnstable(ConvergenceError):
    """Finite-difference Richardson levels disagree."""


class KindMismatch(DyckMomentsError):
    """Mixed exact-rational and floating scalars in one series operation."""


class OrderMismatch(DyckMomentsError):
    """Series of different truncation orders combined."""


class CapExceeded(DyckMomentsError):
    """Enumeration size beyond the configured safety cap."""


class MalformedPath(DyckMomentsError):
    """Step sequence is not a valid excursion/bridge."""


class MismatchError(DyckMomentsError):
    """A cross-validation check failed (CLI exit code 4)."""


class BoundViolation(MismatchError):
    """A proven moment bound was violated (indicates an implementation bug)."""


class NoClosedForm(DyckMomentsError):
    """The cost family has no known closed-form alpha."""
