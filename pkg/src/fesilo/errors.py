"""Exception hierarchy shared by the numerical modules and the CLI."""


class FesError(ValueError):
    """Base class for all fesilo errors."""


class DimensionMismatchError(FesError):
    """Two states (or a state and an operator) have incompatible sizes."""


class InvalidStateError(FesError):
    """A state is malformed, not normalizable, or outside the FES subspace."""


class NotFesError(InvalidStateError):
    """A state has a component outside the flip-and-exchange symmetric span."""


class DomainError(FesError):
    """A curve parameter sits on a singular point (t = +1 or t = -1)."""
