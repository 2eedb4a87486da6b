"""Exception hierarchy shared across the package."""


class DacError(Exception):
    """Base class for every error raised by this package."""


# --- backend / transport ---

class BackendError(DacError):
    """A language-model call failed in a way the caller cannot recover from."""


class TransportError(BackendError):
    """HTTP transport kept failing after the configured number of retries."""


class AuthError(BackendError):
    """Missing or rejected API credential."""


class ReplayMiss(BackendError):
    """Replay store has no recorded response for this request key."""


class UnrecognizedPrompt(BackendError):
    """The deterministic mock received a prompt matching none of its grammars."""


class StoreIOError(DacError):
    """Transcript store could not be read or written."""


# --- solver / parsing ---

class DecomposeParseError(DacError):
    """Decompose-stage output could not be parsed into one or more sub-tasks."""


class VerdictParseError(DacError):
    """Verification response names neither option, or names both."""


class MergeInconsistency(DacError):
    """Backend-produced merge answer violates the programmatic merge contract."""


class MaxDepthExceeded(DacError):
    """Problem size never fell below the recursion threshold within max_depth."""


class UnsupportedStrategy(DacError):
    """Strategy or task kind has no template registered for it."""


class EmptyInput(DacError):
    """An operation requiring at least one element received none."""


# --- digit-string task ---

class TooShort(DacError):
    """Operand has fewer digits than the operation requires."""


class NonDigitInput(DacError):
    """Expected a string of decimal digits."""


# --- metrics / datasets ---

class LengthMismatch(DacError):
    """Paired sequences have different lengths."""


class DatasetError(DacError):
    """Dataset is missing, empty, or unusable as a whole."""


class SchemaError(DacError):
    """A dataset line failed schema validation."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# --- tree matching ---

class MalformedTree(DacError):
    """Pointer-list encoding contains a cycle, a multi-parent node, or a bad index."""


class NullPattern(DacError):
    """Decomposition requires a non-null pattern root."""


class PreconditionViolation(DacError):
    """Operation called outside its stated precondition."""


class BadInput(DacError):
    """Gate evaluation requires a 0/1 vector of the declared fan-in."""
