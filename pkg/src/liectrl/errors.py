"""Exception hierarchy shared by all liectrl modules."""


class LieCtrlError(Exception):
    """Base class for all library errors."""


class DomainError(LieCtrlError, ValueError):
    """A point lies outside the chart of its group (e.g. Aff2 with x <= 0)."""


class ModelError(LieCtrlError, ValueError):
    """A model is malformed: bad structure constants, non-automorphism, ..."""


class PreconditionError(LieCtrlError, ValueError):
    """An operation was called outside its documented preconditions."""


class NumericalError(LieCtrlError, ArithmeticError):
    """A numerical step broke down (singular Jacobian, failed solve)."""


class ResourceError(LieCtrlError, RuntimeError):
    """An enumeration would exceed its configured size guard."""


class SpecError(LieCtrlError, ValueError):
    """A system specification document could not be parsed or validated."""
