"""Exception types raised across the package.

Everything derives from UssdLabError so callers can catch library
failures with a single except clause.
"""


class UssdLabError(Exception):
    """Base class for all errors raised by this package."""


class RegisterClash(UssdLabError):
    """Tensor product of registers sharing a qubit label."""


class UnknownQubit(UssdLabError):
    """A qubit label that is not part of the register at hand."""


class ShapeError(UssdLabError):
    """Array dimensions inconsistent with the declared register."""


class BasisError(UssdLabError):
    """Measurement basis is not orthonormal."""


class NotIsometric(UssdLabError):
    """Unitary completion constraints do not preserve inner products."""


class DegenerateOverlap(UssdLabError):
    """State overlap of unit modulus: the two inputs cannot be told apart."""


class UndefinedPhase(UssdLabError):
    """Geometric phase requested for a loop with a degenerate vertex."""


class EmbeddingError(UssdLabError):
    """Concrete state vectors do not reproduce the declared overlaps."""


class PartitionError(UssdLabError):
    """Bipartition request that is empty or covers the whole register."""


class RangeError(UssdLabError):
    """Parameter outside its admissible interval."""


class NumericalError(UssdLabError):
    """Internal cross-check failed beyond its tolerance."""
