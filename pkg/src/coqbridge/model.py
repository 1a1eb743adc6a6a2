"""Domain types shared across the document, context, and proof layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

from .positions import Position, Range


class DiagnosticSeverity(enum.IntEnum):
    ERROR = 1
    WARNING = 2
    INFORMATION = 3
    HINT = 4


@dataclass(frozen=True)
class Diagnostic:
    range: Range
    severity: DiagnosticSeverity
    message: str

    @classmethod
    def from_lsp(cls, d: dict) -> "Diagnostic":
        return cls(Range.from_dict(d["range"]),
                   DiagnosticSeverity(d.get("severity", 1)),
                   d.get("message", ""))


@dataclass(frozen=True)
class RawSpan:
    """One executable sentence as reported by the server."""
    range: Range
    text: str  # exact document slice at range
    ast: Any


@dataclass(frozen=True, eq=True)
class Step:
    """One executable sentence of a Coq file.

    ``text`` is the verbatim sentence including the whitespace that
    separates it from the previous sentence, so concatenating step texts
    reconstructs the document prefix. ``range`` covers the sentence
    proper, excluding that leading whitespace.
    """
    text: str
    ast: Any
    range: Range

    def __repr__(self):
        return f"Step({self.text!r})"


class TermType(enum.Enum):
    THEOREM = "Theorem"
    LEMMA = "Lemma"
    DEFINITION = "Definition"
    FIXPOINT = "Fixpoint"
    COFIXPOINT = "CoFixpoint"
    INDUCTIVE = "Inductive"
    COINDUCTIVE = "CoInductive"
    RECORD = "Record"
    CLASS = "Class"
    INSTANCE = "Instance"
    NOTATION = "Notation"
    TACTIC = "Tactic"
    VARIANT = "Variant"
    FACT = "Fact"
    REMARK = "Remark"
    COROLLARY = "Corollary"
    PROPOSITION = "Proposition"
    PROPERTY = "Property"
    OBLIGATION = "Obligation"
    DERIVE = "Derive"
    OTHER = "Other"


@dataclass(frozen=True, eq=True)
class Term:
    """A named definition with the step that introduced it."""
    name: str  # fully qualified
    type: TermType
    step: Step
    module_path: tuple = ()

    def __repr__(self):
        return f"Term({self.name}, {self.type.value})"


@dataclass(frozen=True)
class Hypothesis:
    names: tuple
    type_text: str
    definition_text: Optional[str] = None

    @classmethod
    def from_lsp(cls, h: dict) -> "Hypothesis":
        return cls(tuple(h.get("names", [])), h.get("ty", ""), h.get("def"))

    def as_dict(self) -> dict:
        return {"names": list(self.names), "type": self.type_text,
                "definition": self.definition_text}


@dataclass(frozen=True)
class Goal:
    hypotheses: tuple
    conclusion: str

    @classmethod
    def from_lsp(cls, g: dict) -> "Goal":
        return cls(tuple(Hypothesis.from_lsp(h) for h in g.get("hyps", [])),
                   g.get("ty", ""))

    def as_dict(self) -> dict:
        return {"hypotheses": [h.as_dict() for h in self.hypotheses],
                "conclusion": self.conclusion}


@dataclass(frozen=True)
class GoalAnswer:
    """Structured proof state at a position.

    ``goals`` are the foreground goals; ``stack`` holds the focus stack
    as (left, right) pairs of background goals; empty everywhere when the
    position is outside proof mode.
    """
    goals: tuple = ()
    stack: tuple = ()  # of (tuple[Goal], tuple[Goal])
    shelf: tuple = ()
    given_up: tuple = ()
    position: Position = field(default_factory=lambda: Position(0, 0))

    @property
    def in_proof(self) -> bool:
        return bool(self.goals or any(left or right for left, right in self.stack)
                    or self.shelf or self.given_up)

    @classmethod
    def from_response(cls, response: Optional[dict]) -> "GoalAnswer":
        response = response or {}
        position = Position.from_dict(response.get("position", {"line": 0, "character": 0}))
        payload = response.get("goals") or {}
        return cls(
            goals=tuple(Goal.from_lsp(g) for g in payload.get("goals", [])),
            stack=tuple(
                (tuple(Goal.from_lsp(g) for g in left),
                 tuple(Goal.from_lsp(g) for g in right))
                for left, right in payload.get("stack", [])),
            shelf=tuple(Goal.from_lsp(g) for g in payload.get("shelf", [])),
            given_up=tuple(Goal.from_lsp(g) for g in payload.get("given_up", [])),
            position=position,
        )

    def as_dict(self) -> dict:
        return {
            "position": self.position.as_dict(),
            "goals": [g.as_dict() for g in self.goals],
            "stack": [[[g.as_dict() for g in left], [g.as_dict() for g in right]]
                      for left, right in self.stack],
            "shelf": [g.as_dict() for g in self.shelf],
            "given_up": [g.as_dict() for g in self.given_up],
        }
