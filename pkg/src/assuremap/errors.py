"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError -> 3,
FormatError -> 4. Plain input-contract violations raise ValueError and state
violations raise RuntimeError.
"""


class ConfigError(Exception):
    """A run configuration is missing, inconsistent, or points at absent files."""


class NumericalError(Exception):
    """A linear-algebra step failed beyond recovery (e.g. jitter escalation exhausted)."""

    def __init__(self, message, jitter=None):
        super().__init__(message)
        self.jitter = jitter


class FormatError(Exception):
    """A serialized artifact (model file, IDX file, report) is malformed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class OracleError(Exception):
    """The black-box accuracy function failed mid-run.

    Carries the partial sampling history so the caller can inspect or resume.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = tuple(history)
