"""Exception hierarchy shared by all models."""


class StimVcoError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StimVcoError, ValueError):
    """A model field is outside its allowed range.

    ``field`` names the offending attribute so callers (and the CLI) can
    report it without parsing the message.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(StimVcoError, ValueError):
    """An operation was asked to evaluate outside its mathematical domain."""


class OverloadError(DomainError):
    """The charge pump cannot deliver the requested current."""


class CodecError(StimVcoError):
    """Base class for link-codec failures."""


class FrameError(CodecError):
    """Bad sync word, header or parity at a given bit offset."""

    def __init__(self, offset, message):
        self.offset = offset
        super().__init__(f"bit {offset}: {message}")


class LengthError(CodecError):
    """Stream or signal has the wrong length."""
