"""Exception hierarchy for lfcsim."""


class LFCError(Exception):
    """Base class for all library errors."""


class AlgebraicLoopError(LFCError):
    """Closed-loop denominator (or interconnection) is singular."""


class PoleAtOriginError(LFCError):
    """DC gain requested for a transfer function with a pole at s = 0."""


class MissingCompensationParams(LFCError):
    """Hydro transient-droop compensation enabled without R_t / T_r."""


class ZeroControllerError(LFCError):
    """PI controller requested with both gains zero."""


class AllUnstableError(LFCError):
    """Every point of a tuning grid diverged."""


class UnknownAreaRef(LFCError):
    """A tie line or disturbance names an area that does not exist."""


class UnknownSignalError(LFCError):
    """Plot or lookup of a signal that is not in the result."""


class DivergenceError(LFCError):
    """Integration blew up; ``partial`` holds the trajectory up to that point."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ParseError(LFCError):
    """Scenario file is syntactically broken."""

    def __init__(self, location, message):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.message = message


class ValidationError(LFCError):
    """Scenario value violates an invariant of its owning type."""

    def __init__(self, location, message):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.message = message
