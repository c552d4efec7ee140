class NagataKnnError(Exception):
    pass


class DomainError(NagataKnnError, ValueError):
    """Argument outside the domain of an operation (k > n, mismatched families...)."""


class ConfigError(NagataKnnError, ValueError):
    pass


class PreconditionError(NagataKnnError, ValueError):
    pass


class DepthExhaustedError(NagataKnnError):
    """Two lazy sequences agreed up to the maximum comparison depth."""


class CapacityError(NagataKnnError):
    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class ResolutionError(NagataKnnError):
    """k-NN radius dropped below the resolution of a truncated space."""
