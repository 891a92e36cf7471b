"""Exception hierarchy shared by all khessian modules."""


class KHessianError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(KHessianError, ValueError):
    """Malformed numerical input: non-finite entries, mismatched shapes or kinds."""


class OrderError(KHessianError, ValueError):
    """An order k (or m) outside its admissible range."""


class CapacityError(KHessianError):
    """A size guard was exceeded (e.g. the Kronecker-delta sum for n > 6)."""


class DegenerateConeError(KHessianError, ValueError):
    """A vector that should be interior to the cone has zero slack."""


class ConeMembershipError(KHessianError, ValueError):
    """A vector that must lie in the Garding cone does not."""


class HypothesisViolationError(KHessianError):
    """A black-box function broke the non-negativity hypothesis it was promised to satisfy."""


class BoundaryConditionError(KHessianError, ValueError):
    """A function that must vanish on the unit sphere does not."""


class ConfigError(KHessianError, ValueError):
    """Invalid suite configuration; the message names the offending field."""
