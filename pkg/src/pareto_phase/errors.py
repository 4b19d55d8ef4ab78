"""Exception hierarchy shared by all modules."""


class ParetoPhaseError(Exception):
    pass


class InvalidArgumentError(ParetoPhaseError, ValueError):
    pass


class ResourceLimitError(ParetoPhaseError, MemoryError):
    pass


class ConfigError(ParetoPhaseError, ValueError):
    pass


class SpecParseError(ConfigError):
    """Malformed box or projection text; ``token`` is the offending piece."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token
