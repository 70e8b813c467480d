"""Exception types shared across the package."""


class CorpusFormatError(ValueError):
    """A corpus record could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SpanValidationError(ValueError):
    """An entity span is inconsistent with its sentence."""


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent."""
