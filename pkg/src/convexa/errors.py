"""
Exception hierarchy for convexa.

Every failure raised by the library derives from ConvexaError so that the
command line can separate input errors from failed checks.
"""


class ConvexaError(Exception):
    """Base class for all convexa errors."""


class ConfigError(ConvexaError):
    """The configuration file is malformed."""


# rotations
class BranchAmbiguous(ConvexaError):
    """Consecutive frames are too far apart to choose a lift branch."""


class ProjectionMismatch(ConvexaError):
    """The initial quaternion does not project to the first frame."""


# curves
class Degenerate(ConvexaError):
    """A projective image lost rank."""


class NotMonotone(ConvexaError):
    """A reparametrization is not strictly increasing."""


# bruhat
class NearBoundary(ConvexaError):
    """An entry lies too close to the zero tolerance to classify the cell."""


class WrongCell(ConvexaError):
    """A matrix is not in the Bruhat cell the operation requires."""


# convexity
class NotLocallyConvex(ConvexaError):
    """The curve has non-positive geodesic curvature somewhere."""


class NotInUk(ConvexaError):
    """The curve is outside the domain of the M_k coordinates."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        message = f"curve not in U_k ({reason})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


# families
class NotStablyConvex(ConvexaError):
    """The relative frame (or lift) is not stably convex."""


class PointOutsideRegion(ConvexaError):
    """The prescribed point cannot lie on a convex arc with the given frames."""


class NoConvergence(ConvexaError):
    """A construction left a residual above tolerance."""


class WindowTooSmall(ConvexaError):
    """The patch parameters cannot realize the requested window."""


class ConvexityWindowNotFound(ConvexaError):
    """No convexity window was found for the requested target."""


# deform
class WindowOverflow(ConvexaError):
    """An insertion window does not fit inside [0, 1]."""


class BridgeFailed(ConvexaError):
    """An ellipse bridge could not be fitted while spreading loops."""

    def __init__(self, j: int, cause: Exception | str | None = None):
        self.j = j
        self.cause = cause
        message = f"ellipse bridge {j} failed"
        if cause is not None:
            message += f": {cause}"
        super().__init__(message)


class NotGraftable(ConvexaError):
    """The relative frame is not in a graftable cell or not normalized."""


# harness
class NonTransversal(ConvexaError):
    """A preimage or zero has a degenerate Jacobian."""


class TooCoarse(ConvexaError):
    """A sampled loop turns too fast to count its winding."""


class WrongEndpoint(ConvexaError):
    """The endpoint lift is not +1 or -1."""


class FormatError(ConvexaError):
    """A serialized document is malformed."""

    def __init__(self, message: str, location: str = "$"):
        self.location = location
        super().__init__(f"{location}: {message}")


class VersionUnsupported(FormatError):
    """The document declares a format version this build cannot read."""
