"""The queryable index of terms and notations defined up to a point.

``FileContext.define`` inspects a step's AST, registers whatever the
step introduces (term names are qualified by the enclosing module path;
notations are indexed by their shape pattern, e.g. ``_ ++ _``), and
returns a delta whose ``unapply`` restores the index exactly — that
delta journal is what makes backward navigation purely client-side.

``step_context`` is the premise extractor: every identifier leaf in a
step's AST that resolves in the index, plus every notation application
whose pattern is indexed, in document order, deduplicated. Identifiers
that resolve to nothing (locals, hypotheses) are skipped silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import Step, Term, TermType

_THEOREM_KINDS = {
    "Theorem": TermType.THEOREM,
    "Lemma": TermType.LEMMA,
    "Fact": TermType.FACT,
    "Remark": TermType.REMARK,
    "Corollary": TermType.COROLLARY,
    "Proposition": TermType.PROPOSITION,
    "Property": TermType.PROPERTY,
}

_DEFINITION_KINDS = {
    "Definition": TermType.DEFINITION,
    "Example": TermType.DEFINITION,
    "Fixpoint": TermType.FIXPOINT,
    "CoFixpoint": TermType.COFIXPOINT,
    "Instance": TermType.INSTANCE,
    "Obligation": TermType.OBLIGATION,
    "Derive": TermType.DERIVE,
}

_INDUCTIVE_KINDS = {
    "Inductive": TermType.INDUCTIVE,
    "CoInductive": TermType.COINDUCTIVE,
    "Variant": TermType.VARIANT,
    "Record": TermType.RECORD,
    "Class": TermType.CLASS,
}


def notation_pattern(raw: str) -> str:
    """Normalize a notation's defining string to its shape pattern.

    Identifier tokens are the notation's variables and become ``_``;
    symbol tokens are kept: ``"x ++ y"`` -> ``_ ++ _``.
    """
    out = []
    for token in raw.split():
        if token and (token[0].isalpha() or token[0] == "_"):
            out.append("_")
        else:
            out.append(token)
    return " ".join(out)


@dataclass
class ContextDelta:
    """Reversible record of everything one step changed in the index."""
    terms: list = field(default_factory=list)      # (key, new, previous)
    notations: list = field(default_factory=list)  # (pattern, new, previous)
    scopes_opened: list = field(default_factory=list)  # (name, previous_pos)
    segment_pushed: Optional[tuple] = None         # (name, kind)
    segment_popped: Optional[tuple] = None

    @property
    def added_terms(self) -> list:
        return [new for _, new, _ in self.terms]

    @property
    def added_notations(self) -> list:
        return [new for _, new, _ in self.notations]


class FileContext:
    """Name -> Term and pattern -> notation indices with scope tracking."""

    def __init__(self):
        self.terms: dict[str, Term] = {}
        self.notations: dict[str, Term] = {}
        self.open_scopes: list[str] = []
        self.segments: list[tuple] = []  # (name, "module" | "section")

    def __repr__(self):
        return (f"FileContext({len(self.terms)} terms, "
                f"{len(self.notations)} notations, "
                f"scopes={self.open_scopes!r})")

    # -- module bookkeeping ---------------------------------------------------

    @property
    def module_path(self) -> tuple:
        return tuple(name for name, kind in self.segments if kind == "module")

    def qualify(self, name: str) -> str:
        return ".".join(self.module_path + (name,))

    # -- mutation ---------------------------------------------------------------

    def define(self, step: Step) -> ContextDelta:
        """Register whatever ``step`` introduces; returns the applied delta."""
        delta = ContextDelta()
        ast = step.ast if isinstance(step.ast, dict) else {}
        tag = ast.get("tag")
        module_path = self.module_path

        def add_term(name: str, term_type: TermType) -> None:
            key = self.qualify(name)
            term = Term(name=key, type=term_type, step=step, module_path=module_path)
            delta.terms.append((key, term, self.terms.get(key)))
            self.terms[key] = term

        if tag == "VernacStartTheoremProof":
            kind = _THEOREM_KINDS.get(ast.get("kind"), TermType.OTHER)
            if ast.get("name"):
                add_term(ast["name"], kind)
        elif tag == "VernacDefinition":
            kind = _DEFINITION_KINDS.get(ast.get("kind"), TermType.OTHER)
            if ast.get("name"):
                add_term(ast["name"], kind)
        elif tag == "VernacInductive":
            kind = _INDUCTIVE_KINDS.get(ast.get("kind"), TermType.OTHER)
            if ast.get("name"):
                add_term(ast["name"], kind)
            for ctor in ast.get("constructors", []):
                if ctor.get("name"):
                    add_term(ctor["name"], kind)
        elif tag == "VernacNotation":
            raw = ast.get("raw")
            if raw:
                pattern = notation_pattern(raw)
                term = Term(name=pattern, type=TermType.NOTATION, step=step,
                            module_path=module_path)
                delta.notations.append((pattern, term, self.notations.get(pattern)))
                self.notations[pattern] = term
        elif tag == "VernacLtac":
            if ast.get("name"):
                add_term(ast["name"], TermType.TACTIC)
        elif tag == "VernacBeginModule":
            self.segments.append((ast.get("name"), "module"))
            delta.segment_pushed = self.segments[-1]
        elif tag == "VernacBeginSection":
            self.segments.append((ast.get("name"), "section"))
            delta.segment_pushed = self.segments[-1]
        elif tag == "VernacEndSegment":
            if self.segments and self.segments[-1][0] == ast.get("name"):
                delta.segment_popped = self.segments.pop()
        elif tag == "VernacRequire":
            if ast.get("export") is not None:
                for lib in ast.get("libs", []):
                    self._open_scope(lib, delta)
        elif tag == "VernacImport":
            for name in ast.get("names", []):
                self._open_scope(name, delta)
        return delta

    def _open_scope(self, name: str, delta: ContextDelta) -> None:
        previous = self.open_scopes.index(name) if name in self.open_scopes else None
        if previous is not None:
            self.open_scopes.pop(previous)
        self.open_scopes.append(name)
        delta.scopes_opened.append((name, previous))

    def unapply(self, delta: ContextDelta) -> None:
        for name, previous in reversed(delta.scopes_opened):
            self.open_scopes.remove(name)
            if previous is not None:
                self.open_scopes.insert(previous, name)
        if delta.segment_pushed is not None:
            assert self.segments and self.segments[-1] == delta.segment_pushed
            self.segments.pop()
        if delta.segment_popped is not None:
            self.segments.append(delta.segment_popped)
        for pattern, _, previous in reversed(delta.notations):
            if previous is None:
                del self.notations[pattern]
            else:
                self.notations[pattern] = previous
        for key, _, previous in reversed(delta.terms):
            if previous is None:
                del self.terms[key]
            else:
                self.terms[key] = previous

    def seed(self, terms, notations) -> None:
        """Pre-populate with harvested library terms (not journaled)."""
        for term in terms:
            self.terms[term.name] = term
        for pattern, term in notations.items():
            self.notations.setdefault(pattern, term)

    # -- queries -------------------------------------------------------------------

    def lookup(self, name: str) -> Optional[Term]:
        """Resolve a possibly-qualified name to a Term, or None.

        Order: exact match, the enclosing module path innermost first,
        each open scope most-recently-opened first, then the bare final
        segment. Shadowing therefore resolves to the most recent
        definition visible under that name.
        """
        found = self.terms.get(name)
        if found is not None:
            return found
        modules = self.module_path
        for i in range(len(modules), 0, -1):
            found = self.terms.get(".".join(modules[:i] + (name,)))
            if found is not None:
                return found
        for scope in reversed(self.open_scopes):
            found = self.terms.get(f"{scope}.{name}")
            if found is not None:
                return found
        if "." in name:
            return self.terms.get(name.rsplit(".", 1)[-1])
        return None

    def lookup_notation(self, pattern: str) -> Optional[Term]:
        return self.notations.get(pattern)

    def step_context(self, step: Step) -> list:
        """Terms used by ``step``: resolved identifier leaves plus indexed
        notation applications, deduplicated, in document order."""
        out: list[Term] = []
        seen: set = set()

        def emit(term: Optional[Term]) -> None:
            if term is None:
                return
            key = (term.type == TermType.NOTATION, term.name)
            if key not in seen:
                seen.add(key)
                out.append(term)

        def walk(node) -> None:
            if isinstance(node, dict):
                tag = node.get("tag")
                if tag == "Ref" and isinstance(node.get("name"), str):
                    emit(self.lookup(node["name"]))
                elif tag == "CNotation" and isinstance(node.get("pattern"), str):
                    emit(self.lookup_notation(node["pattern"]))
                for value in node.values():
                    walk(value)
            elif isinstance(node, list):
                for item in node:
                    walk(item)

        walk(step.ast)
        return out

    # -- structural equality (exec round-trips) ---------------------------------------

    def snapshot(self) -> tuple:
        return (
            tuple(sorted((k, v) for k, v in self.terms.items())),
            tuple(sorted((k, v) for k, v in self.notations.items())),
            tuple(self.open_scopes),
            tuple(self.segments),
        )
