"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class HoroshiftError(Exception):
    exit_code = 1


class ConfigError(HoroshiftError, ValueError):
    exit_code = 2


class PreconditionError(HoroshiftError, ValueError):
    exit_code = 3


class ContainmentError(PreconditionError):
    """A witness (geodesic, ball, pattern) could leave the finite window."""


class LipschitzError(PreconditionError):
    pass


class IntegrationError(PreconditionError):
    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class ResourceCapError(HoroshiftError, RuntimeError):
    exit_code = 4


class StabilizationError(ResourceCapError):
    def __init__(self, message, vertices=()):
        super().__init__(message)
        self.vertices = list(vertices)


class InvariantBreach(HoroshiftError, AssertionError):
    exit_code = 5
