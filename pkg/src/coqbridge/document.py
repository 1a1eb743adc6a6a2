"""The stateful Coq file abstraction: ordered steps, a movable execution
pointer, a validity flag, and a live context of defined terms.

Navigation is purely client-side: moving forward applies each step's
definitions to the context, moving backward unapplies the journaled
deltas — the server is never asked to retract. Steps and their texts
never change under navigation.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional

from .config import CoqConfig
from .context import FileContext
from .errors import ClosedDocumentError, ExecOutOfRangeError
from .lsp import DocumentHandle, Session
from .model import DiagnosticSeverity, Step
from .positions import position_to_offset


def steps_from_spans(text: str, spans) -> list:
    """Build Steps from server spans: each step's text is the inter-span
    whitespace plus the sentence, so the concatenation reconstructs the
    document up to the last sentence end."""
    steps = []
    previous_end = 0
    for span in spans:
        end = position_to_offset(text, span.range.end)
        steps.append(Step(text=text[previous_end:end], ast=span.ast, range=span.range))
        previous_end = end
    return steps


class CoqDocument:
    """A Coq file under server control with an execution pointer.

    One logical owner mutates a document at a time. The session may be
    shared across documents (each document still gets its own handle);
    a document closes its session only if it created it.
    """

    def __init__(self, path: Path, config: Optional[CoqConfig] = None,
                 session: Optional[Session] = None):
        self.path = Path(path)
        self.config = config or CoqConfig()
        self._owns_session = session is None
        self.session = session or Session(self.path.parent, self.config)
        self._closed = False
        try:
            self._handle: DocumentHandle = self.session.open_document(self.path)
            self._steps: list = []
            self._pointer = -1
            self._context = FileContext()
            self._journal: list = []
            self._refresh_steps()
            self._post_open()
        except BaseException:
            # never leak the child process on a failed open
            if self._owns_session:
                self.session.kill()
            raise

    def _post_open(self) -> None:
        """Hook for subclasses; runs inside the constructor guard."""

    # -- construction helpers ----------------------------------------------------

    def _refresh_steps(self) -> None:
        spans = self.session.request_spans(self._handle)
        self._steps = steps_from_spans(self._handle.text, spans)

    def _reset_bookkeeping(self) -> None:
        self._context = FileContext()
        self._journal = []

    # -- accessors ------------------------------------------------------------------

    @property
    def steps(self) -> list:
        return list(self._steps)

    @property
    def pointer(self) -> int:
        return self._pointer

    @property
    def context(self) -> FileContext:
        return self._context

    @property
    def text(self) -> str:
        return self._handle.text

    @property
    def version(self) -> int:
        return self._handle.version

    def text_hash(self) -> str:
        return hashlib.sha256(self._handle.text.encode("utf-8")).hexdigest()

    def diagnostics(self) -> list:
        self._ensure_open()
        return self.session.diagnostics(self._handle)

    def errors(self) -> list:
        return [d for d in self.diagnostics()
                if d.severity == DiagnosticSeverity.ERROR]

    @property
    def is_valid(self) -> bool:
        """True iff the current content has no error-severity diagnostics."""
        return not self.errors()

    # -- navigation ------------------------------------------------------------------

    def exec(self, n: int = 1) -> list:
        """Move the pointer by ``n`` steps (negative moves backward).

        Returns the affected steps: document order going forward,
        reverse document order going backward. Raises
        ExecOutOfRangeError when the move would leave [-1, len(steps)-1];
        nothing is clamped silently.
        """
        self._ensure_open()
        if n == 0:
            return []
        target = self._pointer + n
        if not -1 <= target <= len(self._steps) - 1:
            raise ExecOutOfRangeError(
                f"exec({n}) from pointer {self._pointer} leaves "
                f"[-1, {len(self._steps) - 1}]")
        affected = []
        if n > 0:
            for i in range(self._pointer + 1, target + 1):
                self._apply_step(i)
                affected.append(self._steps[i])
        else:
            for i in range(self._pointer, target, -1):
                self._unapply_step(i)
                affected.append(self._steps[i])
        self._pointer = target
        return affected

    def run_to_end(self) -> list:
        return self.exec(len(self._steps) - 1 - self._pointer)

    def _apply_step(self, index: int) -> None:
        delta = self._context.define(self._steps[index])
        self._journal.append(delta)

    def _unapply_step(self, index: int) -> None:
        delta = self._journal.pop()
        self._context.unapply(delta)

    def _replay(self, pointer: int) -> None:
        """Rebuild bookkeeping from scratch up to ``pointer`` (post-edit)."""
        self._reset_bookkeeping()
        for i in range(pointer + 1):
            self._apply_step(i)
        self._pointer = pointer

    def _step_index(self, step: Step) -> int:
        for i, candidate in enumerate(self._steps):
            if candidate is step or (candidate.range == step.range
                                     and candidate.text == step.text):
                return i
        raise ValueError(f"step {step!r} is not in this document")

    # -- compilation --------------------------------------------------------------------

    def compile(self) -> None:
        """Save the compiled .vo next to the source."""
        self._ensure_open()
        self.session.save_compiled(self._handle)

    # -- editing (implemented in edits.py) -------------------------------------------------

    def add_step(self, previous_step_index: int, text: str) -> None:
        from .edits import Add, apply_transaction
        apply_transaction(self, [Add(previous_step_index, text)])

    def delete_step(self, step_index: int) -> None:
        from .edits import Delete, apply_transaction
        apply_transaction(self, [Delete(step_index)])

    def change_steps(self, changes) -> None:
        from .edits import apply_transaction
        apply_transaction(self, changes)

    # -- lifecycle ------------------------------------------------------------------------

    def _ensure_open(self) -> None:
        if self._closed:
            raise ClosedDocumentError(f"document {self.path} is closed")

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self.session.close_document(self._handle)
        finally:
            if self._owns_session:
                self.session.shutdown()

    def __enter__(self) -> "CoqDocument":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
