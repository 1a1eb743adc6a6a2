"""Exception hierarchy for coqbridge.

Transport problems poison the whole session; document-level problems
(invalid edits, out-of-range navigation) leave the session usable.
"""

from __future__ import annotations


class CoqBridgeError(Exception):
    """Base class for every error raised by this package."""


# --- transport layer ---------------------------------------------------


class TransportError(CoqBridgeError):
    """Fatal wire-level failure; the transport is unusable afterwards."""


class MalformedHeaderError(TransportError):
    """Frame header missing Content-Length or carrying a non-numeric one."""


class PrematureEOFError(TransportError):
    """Stream ended in the middle of a frame body."""


class TransportClosedError(TransportError):
    """Write or call attempted after the server process went away."""


class RpcTimeoutError(TransportError):
    """No response arrived within the per-request timeout."""


class RpcServerError(CoqBridgeError):
    """The server answered a request with an error member."""

    def __init__(self, code: int, message: str, data=None):
        super().__init__(f"server error {code}: {message}")
        self.code = code
        self.message = message
        self.data = data


# --- session layer -----------------------------------------------------


class SessionError(CoqBridgeError):
    pass


class SpawnError(SessionError):
    """The server binary could not be started."""


class HandshakeError(SessionError):
    """initialize/initialized failed."""


class StaleVersionError(SessionError):
    """didChange issued with a version not greater than the previous one."""


class CompilationError(SessionError):
    """save_vo failed."""


class CompilationRefusedError(CompilationError):
    """The server refused to compile the document."""


class CompilationIOError(CompilationError):
    """The compiled output could not be written."""


# --- document layer ----------------------------------------------------


class DocumentError(CoqBridgeError):
    pass


class ExecOutOfRangeError(DocumentError):
    """exec(n) would move the pointer outside [-1, len(steps) - 1]."""


class StepIndexError(DocumentError):
    """An edit referenced a step index outside the current step list."""


class InvalidChangeError(DocumentError):
    """An edit introduced new error diagnostics and was rolled back.

    ``diagnostics`` holds the error-severity diagnostics observed on the
    rejected content (after the rollback completed).
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class EmptyProofError(DocumentError):
    """pop_step on a proof with no steps."""


class ClosedDocumentError(DocumentError):
    """Operation on a document whose session was closed."""
