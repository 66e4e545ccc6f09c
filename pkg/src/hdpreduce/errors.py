class HdpError(Exception):
    pass


class NotSkew(HdpError, ValueError):
    pass


class Degenerate(HdpError, ValueError):
    pass


class ProjectionFailure(HdpError):
    pass


class StepFailure(HdpError):
    pass


class Inconsistent(HdpError):
    """Linear constraint system has no solution within tolerance."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class DriftAlarm(HdpError):
    pass


class DegenerateDistribution(HdpError):
    """Rank of the variational data changed along a trajectory."""


class ConfigError(HdpError):
    pass


class RankDeficiency(UserWarning):
    """A generator was dependent on the others and got dropped."""
