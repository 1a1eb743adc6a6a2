"""Thin research-facing bindings over coqbridge.

Exposes the proof-navigation surface with the conventional class names
(ProofFile, CoqFile, ProofAppend, ProofPop, CoqAdd, CoqDelete) and a
context-managed lifecycle, so interactive scripts read naturally:

    with ProofFile("test.v") as pf:
        pf.exec(len(pf.steps))
        for proof in pf.proofs:
            for step in proof.steps:
                print(step.text, step.ast, step.context, step.goals)

All semantics live in coqbridge; these classes only manage the session
handle, map names, and turn operations on a closed file into
ClosedFileException instead of undefined behavior.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Optional

from coqbridge import (
    Add as CoqAdd,
    CoqBridgeError as CoqError,
    CoqConfig,
    CoqDocument as _CoqDocument,
    Delete as CoqDelete,
    EmptyProofError,
    GoalAnswer,
    InvalidChangeError as InvalidChangeException,
    ProofAppend,
    ProofDocument as _ProofDocument,
    ProofPop,
    ProofStatus,
)

__version__ = "0.1.0"

__all__ = [
    "CoqAdd",
    "CoqDelete",
    "CoqError",
    "CoqFile",
    "ClosedFileException",
    "EmptyProofError",
    "GoalAnswer",
    "InvalidChangeException",
    "ProofAppend",
    "ProofFile",
    "ProofPop",
    "ProofStatus",
]


class ClosedFileException(CoqError):
    """Operation on a file whose session was already closed."""


def _build_config(config: Optional[CoqConfig], overrides: dict) -> CoqConfig:
    base = config or CoqConfig()
    return replace(base, **overrides) if overrides else base


class CoqFile:
    """Stepwise interaction with one Coq file.

    Owns a live language-server session from construction until
    ``close`` (or the end of the ``with`` block); every operation after
    that raises ClosedFileException.
    """

    _core_class = _CoqDocument

    def __init__(self, path, config: Optional[CoqConfig] = None, **overrides):
        self._core = self._core_class(Path(path), _build_config(config, overrides))
        self._open = True

    # -- lifecycle ---------------------------------------------------------

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        if self._open:
            self._open = False
            self._core.close()

    def _live(self):
        if not self._open:
            raise ClosedFileException(f"{self.path} is closed")
        return self._core

    # -- reading -------------------------------------------------------------

    @property
    def path(self) -> Path:
        return self._core.path

    @property
    def steps(self) -> list:
        return self._live().steps

    @property
    def pointer(self) -> int:
        return self._live().pointer

    @property
    def context(self):
        return self._live().context

    @property
    def is_valid(self) -> bool:
        return self._live().is_valid

    @property
    def text(self) -> str:
        return self._live().text

    def diagnostics(self) -> list:
        return self._live().diagnostics()

    # -- navigation -------------------------------------------------------------

    def exec(self, nsteps: int = 1) -> list:
        return self._live().exec(nsteps)

    def run(self) -> list:
        """Execute to the end of the file."""
        return self._live().run_to_end()

    # -- modification ------------------------------------------------------------

    def add_step(self, previous_step_index: int, step_text: str) -> None:
        self._live().add_step(previous_step_index, step_text)

    def delete_step(self, step_index: int) -> None:
        self._live().delete_step(step_index)

    def change_steps(self, changes) -> None:
        self._live().change_steps(changes)

    def save_vo(self) -> None:
        self._live().compile()


class ProofFile(CoqFile):
    """CoqFile plus proof tracking, per-step goals and premise context."""

    _core_class = _ProofDocument

    @property
    def proofs(self) -> list:
        return self._live().proofs

    @property
    def open_proofs(self) -> list:
        return self._live().open_proofs

    @property
    def unproven_proofs(self) -> list:
        return self._live().unproven_proofs

    @property
    def current_goals(self) -> GoalAnswer:
        return self._live().current_goals

    @property
    def in_proof(self) -> bool:
        return self._live().in_proof

    def append_step(self, proof, step_text: str) -> None:
        self._live().append_step(proof, step_text)

    def pop_step(self, proof) -> None:
        self._live().pop_step(proof)

    def change_proof(self, proof, changes) -> None:
        self._live().change_proof(proof, changes)
