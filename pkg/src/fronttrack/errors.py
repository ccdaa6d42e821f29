"""Exception hierarchy shared by all fronttrack modules."""


class FrontTrackError(Exception):
    """Base class for every error raised by this package."""


class KappaOutOfRange(FrontTrackError, ValueError):
    pass


class PositionNotFound(FrontTrackError, KeyError):
    pass


class InvalidProfile(FrontTrackError, ValueError):
    pass


class DegenerateJump(FrontTrackError, ValueError):
    pass


class InsufficientSamples(FrontTrackError, ValueError):
    pass


class StateOutOfRange(FrontTrackError, ValueError):
    pass


class InvalidFlux(FrontTrackError, ValueError):
    pass


class TVBoundExceeded(FrontTrackError):
    pass


class InconsistentEvent(FrontTrackError):
    pass


class EventCountExceeded(FrontTrackError):
    pass


class QuadratureFailure(FrontTrackError, ArithmeticError):
    pass


class InvalidSource(FrontTrackError, ValueError):
    pass


class ConfigInvalid(FrontTrackError, ValueError):
    pass


class DomainViolation(FrontTrackError):
    """Initial datum outside the admissible Glimm-functional domain."""


class TVBlowup(FrontTrackError):
    """The Glimm functional exceeded its linear-growth envelope."""


class FamilyRunMismatch(FrontTrackError):
    pass


class BoundViolation(FrontTrackError):
    def __init__(self, name, detail=""):
        super().__init__(f"bound {name!r} violated: {detail}")
        self.name = name
        self.detail = detail


class OutOfWindow(FrontTrackError, ValueError):
    pass


class InvalidBoundary(FrontTrackError):
    pass


class Degenerate(FrontTrackError, ValueError):
    pass


class ScheduleViolation(FrontTrackError, ValueError):
    pass


class OutOfRampRegion(FrontTrackError, ValueError):
    pass


class RunFailure(FrontTrackError):
    pass
