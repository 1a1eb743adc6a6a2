"""Proof tracking on top of the document: per-step goals, proof terms
with statement-level and step-level premise context, open/nested proof
management, and harvesting of imported libraries' terms.

Opening a proof document is more expensive than opening a plain
document: every transitively Require'd library found on the load path
is checked once so its terms seed the context (optionally cached on
disk, keyed by content hash). Goal queries are lazy per step and
memoized by (content hash, position), so navigation and rollback never
re-ask the server for states it already produced.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
from pathlib import Path
from typing import Optional

from .config import CoqConfig, resolve_library
from .context import FileContext
from .document import CoqDocument, steps_from_spans
from .edits import translate_proof_changes
from .errors import DocumentError
from .model import GoalAnswer, Step, Term, TermType
from .positions import Position, Range

log = logging.getLogger(__name__)

_CLOSER_STATUS = {"Qed": "closed", "Defined": "closed", "Save": "closed",
                  "Admitted": "admitted", "Abort": "admitted"}


class ProofStatus(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"
    ADMITTED = "admitted"


class ProofStep:
    """One step inside a proof: the step, the goals before it was taken,
    and the terms it uses. Goals are fetched lazily and cached."""

    __slots__ = ("step", "context", "_document", "_position", "_goals")

    def __init__(self, step: Step, context: list, document: "ProofDocument",
                 position: Position):
        self.step = step
        self.context = context
        self._document = document
        self._position = position
        self._goals: Optional[GoalAnswer] = None

    @property
    def goals(self) -> GoalAnswer:
        if self._goals is None:
            self._goals = self._document._goals_at(self._position)
        return self._goals

    @property
    def text(self) -> str:
        return self.step.text

    @property
    def ast(self):
        return self.step.ast

    def __eq__(self, other):
        return (isinstance(other, ProofStep)
                and self.step == other.step
                and self._position == other._position
                and self.context == other.context)

    def __repr__(self):
        return f"ProofStep({self.step.text!r})"


class ProofTerm:
    """A proof under construction or completed: the statement term, its
    context, the ordered proof steps, and the open/closed/admitted status."""

    def __init__(self, term: Term, statement_context: list):
        self.term = term
        self.statement_context = statement_context
        self.steps: list = []
        self.status = ProofStatus.OPEN

    @property
    def name(self) -> str:
        return self.term.name

    @property
    def statement(self) -> str:
        return self.term.step.text.strip()

    @property
    def context(self) -> list:
        return self.statement_context

    def __eq__(self, other):
        return (isinstance(other, ProofTerm)
                and self.term == other.term
                and self.statement_context == other.statement_context
                and self.steps == other.steps
                and self.status == other.status)

    def __repr__(self):
        return f"ProofTerm({self.name}, {self.status.value}, {len(self.steps)} steps)"


class ProofDocument(CoqDocument):
    """CoqDocument plus proof bookkeeping and imported-term harvesting."""

    def __init__(self, path: Path, config: Optional[CoqConfig] = None,
                 session=None):
        self._proofs: list = []
        self._open_stack: list = []
        self._proof_journal: list = []
        self._goals_memo: dict = {}
        self._harvest_memo: dict = {}
        self.warnings: list = []
        super().__init__(path, config, session)

    def _post_open(self) -> None:
        self._seed_imports()

    # -- proof views -------------------------------------------------------

    @property
    def proofs(self) -> list:
        """Every proof encountered up to the pointer, statement order."""
        return list(self._proofs)

    @property
    def open_proofs(self) -> list:
        return list(self._open_stack)

    @property
    def unproven_proofs(self) -> list:
        return [p for p in self._proofs if p.status != ProofStatus.CLOSED]

    @property
    def in_proof(self) -> bool:
        return bool(self._open_stack)

    @property
    def current_goals(self) -> GoalAnswer:
        return self._goals_at(self._pointer_position())

    def _pointer_position(self) -> Position:
        if self._pointer >= 0:
            return self._steps[self._pointer].range.end
        return Position(0, 0)

    def _goals_at(self, position: Position) -> GoalAnswer:
        key = (self.text_hash(), position)
        cached = self._goals_memo.get(key)
        if cached is None:
            cached = self.session.request_goals(self._handle, position)
            self._goals_memo[key] = cached
        return cached

    # -- step bookkeeping -----------------------------------------------------

    @staticmethod
    def _opens_proof(ast) -> bool:
        if not isinstance(ast, dict):
            return False
        if ast.get("tag") == "VernacStartTheoremProof":
            return True
        return ast.get("tag") == "VernacDefinition" and ast.get("body") is None

    def _apply_step(self, index: int) -> None:
        super()._apply_step(index)
        step = self._steps[index]
        ast = step.ast if isinstance(step.ast, dict) else {}
        events = []
        if self._opens_proof(ast):
            delta = self._journal[-1]
            added = delta.added_terms
            term = added[0] if added else Term(
                name=ast.get("name") or "<anonymous>", type=TermType.OTHER,
                step=step, module_path=self._context.module_path)
            proof = ProofTerm(term, self._context.step_context(step))
            self._proofs.append(proof)
            self._open_stack.append(proof)
            events.append(("open", proof))
        elif ast.get("tag") == "VernacEndProof" and self._open_stack:
            proof = self._open_stack[-1]
            proof.steps.append(self._make_proof_step(index))
            events.append(("append", proof))
            status = _CLOSER_STATUS.get(ast.get("kind"), "admitted")
            events.append(("close", proof, proof.status))
            proof.status = ProofStatus(status)
            self._open_stack.pop()
        elif self._open_stack:
            proof = self._open_stack[-1]
            proof.steps.append(self._make_proof_step(index))
            events.append(("append", proof))
        self._proof_journal.append(events)

    def _unapply_step(self, index: int) -> None:
        for event in reversed(self._proof_journal.pop()):
            kind = event[0]
            if kind == "open":
                assert self._open_stack and self._open_stack[-1] is event[1]
                self._open_stack.pop()
                self._proofs.remove(event[1])
            elif kind == "append":
                event[1].steps.pop()
            elif kind == "close":
                event[1].status = event[2]
                self._open_stack.append(event[1])
        super()._unapply_step(index)

    def _make_proof_step(self, index: int) -> ProofStep:
        step = self._steps[index]
        position = (self._steps[index - 1].range.end if index > 0
                    else Position(0, 0))
        return ProofStep(step, self._context.step_context(step), self, position)

    def _reset_bookkeeping(self) -> None:
        super()._reset_bookkeeping()
        self._proofs = []
        self._open_stack = []
        self._proof_journal = []
        self._seed_imports()

    # -- proof-scoped editing -----------------------------------------------------

    def append_step(self, proof: ProofTerm, text: str) -> None:
        from .edits import ProofAppend
        self.change_proof(proof, [ProofAppend(text)])

    def pop_step(self, proof: ProofTerm) -> None:
        from .edits import ProofPop
        self.change_proof(proof, [ProofPop()])

    def change_proof(self, proof: ProofTerm, proof_changes) -> None:
        resolved = self._resolve_proof(proof)
        self.change_steps(translate_proof_changes(self, resolved, proof_changes))

    def _resolve_proof(self, proof: ProofTerm) -> ProofTerm:
        for candidate in self._proofs:
            if candidate is proof:
                return candidate
        matches = [c for c in self._proofs if c.term.name == proof.term.name]
        if not matches:
            raise DocumentError(f"proof {proof.term.name} is not in this document")
        return matches[-1]

    # -- import harvesting ------------------------------------------------------------

    @staticmethod
    def _requires_of(steps) -> list:
        logicals = []
        for step in steps:
            ast = step.ast if isinstance(step.ast, dict) else {}
            if ast.get("tag") == "VernacRequire":
                for lib in ast.get("libs", []):
                    if lib not in logicals:
                        logicals.append(lib)
        return logicals

    def _seed_imports(self) -> None:
        """Harvest transitively Require'd libraries, wave by wave, and seed
        the context. Waves may be harvested concurrently (one dedicated
        session each) when config.harvest_jobs > 1."""
        if not self.config.harvest_imports:
            return
        seen: set = set()
        terms: list = []
        notations: dict = {}
        wave = self._requires_of(self._steps)
        while wave:
            wave = [lib for lib in wave if lib not in seen]
            seen.update(wave)
            if not wave:
                break
            jobs = max(1, self.config.harvest_jobs)
            if jobs > 1 and len(wave) > 1:
                from concurrent.futures import ThreadPoolExecutor
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    results = list(pool.map(
                        lambda lib: self._harvest_library(lib, isolated=True), wave))
            else:
                results = [self._harvest_library(lib) for lib in wave]
            next_wave: list = []
            for logical, harvested in zip(wave, results):
                if harvested is None:
                    message = (f"unresolved import {logical}: "
                               f"no library found on the load path")
                    if message not in self.warnings:
                        self.warnings.append(message)
                        log.warning("%s (%s)", message, self.path)
                    continue
                terms.extend(harvested["terms"])
                for pattern, term in harvested["notations"].items():
                    notations.setdefault(pattern, term)
                next_wave.extend(lib for lib in harvested["requires"]
                                 if lib not in seen and lib not in next_wave)
            wave = next_wave
        self._context.seed(terms, notations)

    def _harvest_library(self, logical: str, isolated: bool = False) -> Optional[dict]:
        if logical in self._harvest_memo:
            return self._harvest_memo[logical]
        path = resolve_library(logical, self.config, root=self.path.parent)
        result = None
        if path is not None:
            source = path.read_text(encoding="utf-8")
            digest = hashlib.sha256(source.encode("utf-8")).hexdigest()
            result = self._load_harvest_cache(logical, digest)
            if result is None:
                if isolated:
                    from .lsp import Session
                    with Session(path.parent, self.config) as own:
                        result = self._harvest_from_server(logical, path, source, own)
                else:
                    result = self._harvest_from_server(logical, path, source,
                                                       self.session)
                self._store_harvest_cache(logical, digest, result)
        self._harvest_memo[logical] = result
        return result

    def _harvest_from_server(self, logical: str, path: Path, source: str,
                             session) -> dict:
        handle = session.open_document(path, text=source)
        try:
            spans = session.request_spans(handle)
            steps = steps_from_spans(source, spans)
            ctx = FileContext()
            for step in steps:
                ctx.define(step)
            terms = [
                Term(name=f"{logical}.{term.name}", type=term.type, step=term.step,
                     module_path=(logical,) + term.module_path)
                for term in ctx.terms.values()
            ]
            notations = dict(ctx.notations)
            return {"terms": terms, "notations": notations,
                    "requires": self._requires_of(steps)}
        finally:
            session.close_document(handle)

    # -- harvest cache --------------------------------------------------------------------

    def _cache_file(self, logical: str, digest: str) -> Optional[Path]:
        if self.config.cache_dir is None:
            return None
        return Path(self.config.cache_dir) / f"{logical}-{digest[:16]}.json"

    def _load_harvest_cache(self, logical: str, digest: str) -> Optional[dict]:
        cache = self._cache_file(logical, digest)
        if cache is None or not cache.is_file():
            return None
        try:
            payload = json.loads(cache.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return None
        return {
            "terms": [_term_from_json(t) for t in payload["terms"]],
            "notations": {p: _term_from_json(t)
                          for p, t in payload["notations"].items()},
            "requires": payload["requires"],
        }

    def _store_harvest_cache(self, logical: str, digest: str, result: dict) -> None:
        cache = self._cache_file(logical, digest)
        if cache is None:
            return
        cache.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "terms": [_term_to_json(t) for t in result["terms"]],
            "notations": {p: _term_to_json(t)
                          for p, t in result["notations"].items()},
            "requires": result["requires"],
        }
        cache.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def _term_to_json(term: Term) -> dict:
    return {
        "name": term.name,
        "type": term.type.value,
        "module_path": list(term.module_path),
        "step": {"text": term.step.text, "ast": term.step.ast,
                 "range": term.step.range.as_dict()},
    }


def _term_from_json(data: dict) -> Term:
    step = Step(text=data["step"]["text"], ast=data["step"]["ast"],
                range=Range.from_dict(data["step"]["range"]))
    return Term(name=data["name"], type=TermType(data["type"]), step=step,
                module_path=tuple(data["module_path"]))
