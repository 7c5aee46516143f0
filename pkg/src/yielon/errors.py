class ConfigError(ValueError):
    """Invalid configuration or parameter value.

    ``field`` names the offending key (dotted path for nested config).
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UndefinedSigma(ValueError):
    """Raised when the squeezing factor is requested on fewer than 2 credits."""


class DomainError(RuntimeError):
    """A task domain failed to execute an instance."""
