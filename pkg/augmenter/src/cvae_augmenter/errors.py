"""Error types for the augmenter CLI exit-code mapping."""


class AugmenterError(Exception):
    """Base class for errors this package raises deliberately."""


class FormatError(AugmenterError):
    """Malformed model or IDX file; carries a byte offset when known."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class InputError(AugmenterError):
    """Structurally valid input that violates a precondition."""
