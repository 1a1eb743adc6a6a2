"""coqbridge: drive the Coq proof assistant through its language server.

Execute proof scripts step by step, track defined terms and proofs with
per-step goals and premise context, make transactional edits that revert
on error, and export premise-annotated proof datasets.
"""

from .config import CoqConfig, MethodNames, load_config, parse_coqproject
from .context import ContextDelta, FileContext
from .document import CoqDocument
from .edits import Add, Delete, ProofAppend, ProofPop
from .errors import (
    CompilationError,
    CoqBridgeError,
    DocumentError,
    EmptyProofError,
    ExecOutOfRangeError,
    InvalidChangeError,
    RpcServerError,
    RpcTimeoutError,
    SessionError,
    SpawnError,
    StaleVersionError,
    StepIndexError,
    TransportClosedError,
    TransportError,
)
from .lsp import DocumentHandle, Session
from .model import (
    Diagnostic,
    DiagnosticSeverity,
    Goal,
    GoalAnswer,
    Hypothesis,
    RawSpan,
    Step,
    Term,
    TermType,
)
from .positions import Position, Range
from .proofs import ProofDocument, ProofStatus, ProofStep, ProofTerm

__version__ = "0.1.0"

__all__ = [
    "Add",
    "CompilationError",
    "ContextDelta",
    "CoqBridgeError",
    "CoqConfig",
    "CoqDocument",
    "Delete",
    "Diagnostic",
    "DiagnosticSeverity",
    "DocumentError",
    "DocumentHandle",
    "EmptyProofError",
    "ExecOutOfRangeError",
    "FileContext",
    "Goal",
    "GoalAnswer",
    "Hypothesis",
    "InvalidChangeError",
    "MethodNames",
    "Position",
    "ProofAppend",
    "ProofDocument",
    "ProofPop",
    "ProofStatus",
    "ProofStep",
    "ProofTerm",
    "Range",
    "RawSpan",
    "RpcServerError",
    "RpcTimeoutError",
    "Session",
    "SessionError",
    "SpawnError",
    "StaleVersionError",
    "Step",
    "StepIndexError",
    "Term",
    "TermType",
    "TransportClosedError",
    "TransportError",
    "load_config",
    "parse_coqproject",
]
