"""Exception hierarchy shared by all kgbohm modules."""


class KGBohmError(Exception):
    """Base class for every error raised by kgbohm."""


class DomainError(KGBohmError, ValueError):
    """An argument lies outside the domain of the operation."""


class MassShellError(DomainError):
    """A mode's stored frequency disagrees with the mass shell."""


class NodeProximity(KGBohmError):
    """The field amplitude is too close to zero for the phase to be defined."""


class ESingularity(KGBohmError):
    """The energy -dS/dt vanishes, so the guidance velocity diverges."""


class UnresolvedPacket(KGBohmError):
    """A packet discretization failed its node-doubling resolution check."""


class EmptyWindow(KGBohmError):
    """An averaging window holds fewer than two trajectory samples."""


class ParseError(KGBohmError):
    """Malformed or unknown line in a scenario configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(KGBohmError):
    """A configuration value violates its documented constraint."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
