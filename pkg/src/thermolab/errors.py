"""Exception hierarchy shared by every thermolab module."""


class ThermolabError(Exception):
    """Base class for all domain failures raised by the package."""


class EqualStates(ThermolabError):
    pass


class ImaginarySpeed(ThermolabError):
    pass


class NoConnection(ThermolabError):
    pass


class InadmissibleProfile(ThermolabError):
    pass


class NoClosedForm(ThermolabError):
    pass


class LinearSolveFailure(ThermolabError):
    pass


class BlowUp(ThermolabError):
    pass


class PositivityViolation(ThermolabError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class OverflowGuard(ThermolabError):
    pass


class InsufficientWindow(ThermolabError):
    pass


class NonPositiveValues(ThermolabError):
    pass


class TooFewPoints(ThermolabError):
    pass


class GridMismatch(ThermolabError):
    pass


class NonMonotoneErrors(ThermolabError):
    pass


class ConfigError(ThermolabError):
    """Raised with a list of ``line N: message`` strings."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DomainTooSmall(ThermolabError):
    pass
