class TiarLabError(Exception):
    """Base class for all errors raised by tiar_lab."""


class PreconditionError(TiarLabError, ValueError):
    """An operation was called with arguments outside its domain."""


class ConfigError(TiarLabError, ValueError):
    """A configuration field failed validation."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
