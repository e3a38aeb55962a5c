class NBodyError(Exception):
    """Base class for all errors raised by this package."""


class CollisionError(NBodyError):
    """Two bodies are closer than the collision guard allows."""


class DomainError(NBodyError):
    """Input violates a mathematical precondition (e.g. non-positive potential)."""


class ConvergenceError(NBodyError):
    """An iterative solver failed to reach the requested tolerance."""


class DegenerateRecordError(NBodyError):
    """A critical point was refused by the index machinery.

    Raised for non-maximal isotropy, for kernels of unexpected dimension,
    and for spectra whose kernel band is not well separated.
    """


class SymmetryError(NBodyError):
    """A permutation or rotation does not preserve the potential data."""


class SchemaError(NBodyError):
    """A problem file does not match the expected schema."""
