"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to:
0 ok, 2 validation, 3 I/O, 4 backend unavailable.
"""


class PplcheckError(Exception):
    exit_code = 2


class ValidationError(PplcheckError):
    """Bad inputs, bad flags, violated preconditions."""

    exit_code = 2


class ParseError(ValidationError):
    """Malformed file content; names the offending line."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class UnknownLabelError(ValidationError):
    pass


class DuplicateIdError(ValidationError):
    pass


class EmptyTargetError(ValidationError):
    """Target text tokenized to zero tokens."""


class UnsupportedModeError(ValidationError):
    """Backend does not implement the requested scoring mode."""


class ProvenanceError(ValidationError):
    """Scores from incompatible score spaces were mixed."""


class InputError(PplcheckError):
    """Missing or unreadable files and other I/O failures."""

    exit_code = 3


class BackendUnavailableError(PplcheckError):
    """Remote backend transport failure after bounded retries."""

    exit_code = 4

    def __init__(self, message: str, retry_hint: str = "retry with --retries or check the sidecar"):
        super().__init__(f"{message} ({retry_hint})")
        self.retry_hint = retry_hint
