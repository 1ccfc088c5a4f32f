"""Semantic exception hierarchy.

Public functions never raise bare ValueError/KeyError; every failure mode
maps to one of the classes below so callers can dispatch on meaning.
"""


class DivgaugeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DivgaugeError, ValueError):
    """Inputs violate a contract: bad masses, parameters out of domain."""


class ShapeError(ValidationError):
    """Mismatched support sizes / array shapes."""


class RangeError(ValidationError):
    """A scalar parameter is outside its admissible range."""


class BoundaryError(RangeError):
    """A two-point operation was called at q in {0, 1}; callers must handle
    the degenerate cases themselves."""


class DominationError(DivgaugeError):
    """Absolute continuity P << Q fails: some atom has Q = 0 but P > 0."""


class DegenerateMarginalError(DivgaugeError):
    """A conditional or fiber was requested at a zero-mass marginal atom."""


class ResourceError(DivgaugeError):
    """An enumeration cap was exceeded; the message names the cap."""


class OrliczSpecError(ValidationError):
    """A supplied Orlicz gauge is unusable (non-convex, non-finite conjugate
    on the required range, ...)."""


class UnknownBoundError(DivgaugeError, KeyError):
    """Bound identifier not present in the verification registry."""
