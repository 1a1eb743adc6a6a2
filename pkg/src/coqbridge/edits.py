"""Transactional mutation of Coq files.

A transaction applies its changes to an off-line text buffer, sends one
full-text update, and compares the resulting error diagnostics against
the pre-edit baseline (ranges adjusted across the edit). If the edit
introduced any new error, the buffer is restored and InvalidChangeError
raised — observers never see a partial transaction, and edits on an
already-invalid file succeed as long as they add no further errors.

Index semantics: indices refer to the step list as it evolves inside
the transaction — every applied Add occupies one new slot immediately
after its anchor and every Delete removes one — exactly as if the same
calls were issued sequentially. A single Add whose text contains
several sentences still occupies one slot within the transaction (the
client does not segment Coq text); after commit the re-checked step
list reflects the real sentence count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyProofError, InvalidChangeError, StepIndexError
from .positions import position_to_offset


@dataclass(frozen=True)
class Add:
    """Insert ``text`` immediately after the step at ``previous_step_index``
    (-1 inserts at the start of the file)."""
    previous_step_index: int
    text: str


@dataclass(frozen=True)
class Delete:
    """Remove the step at ``step_index`` (its sentence plus the whitespace
    that separates it from the previous sentence)."""
    step_index: int


@dataclass(frozen=True)
class ProofAppend:
    """Append ``text`` after the last step of a proof."""
    text: str


@dataclass(frozen=True)
class ProofPop:
    """Remove the last step of a proof."""


def _shift_content(offset, del_start, del_end, ins_len):
    """Map a content offset across one splice; None if it was deleted."""
    if offset is None:
        return None
    if offset < del_start:
        return offset
    if offset >= del_end:
        return offset - (del_end - del_start) + ins_len
    return None


def _shift_boundary(offset, del_start, del_end, ins_len):
    """Map the execution boundary across one splice.

    Deleted executed content clamps the boundary back to the deletion
    start (nearest preceding surviving step); text inserted exactly at
    the boundary counts as executed, which is what lets a proof-tail
    transaction leave the appended steps executed and the proof status
    up to date.
    """
    if offset >= del_end:
        return offset - (del_end - del_start) + ins_len
    if offset <= del_start:
        return offset
    return del_start


def apply_transaction(doc, changes) -> None:
    """Run one all-or-nothing transaction against ``doc``."""
    doc._ensure_open()
    changes = list(changes)
    for change in changes:
        if not isinstance(change, (Add, Delete)):
            raise TypeError(f"not a change: {change!r}")
    if not changes:
        return

    # index pre-check against the evolving step count; nothing applied on failure
    count = len(doc._steps)
    for change in changes:
        if isinstance(change, Add):
            if not -1 <= change.previous_step_index < count:
                raise StepIndexError(
                    f"add after step {change.previous_step_index} with {count} steps")
            count += 1
        else:
            if not 0 <= change.step_index < count:
                raise StepIndexError(
                    f"delete step {change.step_index} with {count} steps")
            count -= 1

    old_text = doc.text
    baseline = doc.errors()
    baseline_spans = [
        (d.message,
         position_to_offset(old_text, d.range.start),
         position_to_offset(old_text, d.range.end))
        for d in baseline
    ]
    pointer_end = 0
    if doc.pointer >= 0:
        pointer_end = position_to_offset(old_text, doc._steps[doc.pointer].range.end)

    # virtual step boundaries [start, end); start = previous sentence end
    bounds = []
    previous = 0
    for step in doc._steps:
        end = position_to_offset(old_text, step.range.end)
        bounds.append([previous, end])
        previous = end

    text = old_text
    for change in changes:
        if isinstance(change, Add):
            anchor = change.previous_step_index
            ins = bounds[anchor][1] if anchor >= 0 else 0
            text = text[:ins] + change.text + text[ins:]
            splice = (ins, ins, len(change.text))
            for pos in range(anchor + 1, len(bounds)):
                bounds[pos][0] += len(change.text)
                bounds[pos][1] += len(change.text)
            bounds.insert(anchor + 1, [ins, ins + len(change.text)])
        else:
            start, end = bounds[change.step_index]
            text = text[:start] + text[end:]
            splice = (start, end, 0)
            del bounds[change.step_index]
            for pos in range(change.step_index, len(bounds)):
                bounds[pos][0] -= end - start
                bounds[pos][1] -= end - start
        baseline_spans = [
            (msg,
             _shift_content(s, *splice),
             _shift_content(e, *splice))
            for msg, s, e in baseline_spans
        ]
        pointer_end = _shift_boundary(pointer_end, *splice)

    # one re-check of the final buffer
    doc.session.update_document(doc._handle, text, doc.version + 1)
    after_errors = doc.errors()
    new_errors = _new_errors(after_errors, baseline_spans, text)
    if new_errors:
        doc.session.update_document(doc._handle, old_text, doc.version + 1)
        raise InvalidChangeError(
            f"change introduced {len(new_errors)} new error(s): "
            f"{new_errors[0].message}", new_errors)

    # commit
    if doc.config.write_through:
        doc.path.write_text(text, encoding="utf-8")
    doc._refresh_steps()
    new_ends = [position_to_offset(text, s.range.end) for s in doc._steps]
    new_pointer = -1
    for i, end in enumerate(new_ends):
        if end <= pointer_end:
            new_pointer = i
        else:
            break
    doc._replay(new_pointer)


def _new_errors(after_errors, baseline_spans, new_text) -> list:
    """Errors in ``after_errors`` not accounted for by the adjusted baseline."""
    remaining = list(baseline_spans)
    unmatched = []
    for diag in after_errors:
        start = position_to_offset(new_text, diag.range.start)
        end = position_to_offset(new_text, diag.range.end)
        exact = next((entry for entry in remaining
                      if entry == (diag.message, start, end)), None)
        if exact is not None:
            remaining.remove(exact)
            continue
        fuzzy = next((entry for entry in remaining
                      if entry[0] == diag.message
                      and (entry[1] is None or entry[2] is None)), None)
        if fuzzy is not None:
            remaining.remove(fuzzy)
            continue
        unmatched.append(diag)
    return unmatched


def translate_proof_changes(doc, proof, proof_changes) -> list:
    """Lower proof-tail changes to positional changes on the document."""
    statement_index = doc._step_index(proof.term.step)
    tail = (doc._step_index(proof.steps[-1].step)
            if proof.steps else statement_index)
    virtual_len = len(proof.steps)
    lowered = []
    for change in proof_changes:
        if isinstance(change, ProofPop):
            if virtual_len == 0:
                raise EmptyProofError(f"pop on empty proof {proof.term.name}")
            lowered.append(Delete(tail))
            tail -= 1
            virtual_len -= 1
        elif isinstance(change, ProofAppend):
            lowered.append(Add(tail, change.text))
            tail += 1
            virtual_len += 1
        else:
            raise TypeError(f"not a proof change: {change!r}")
    return lowered
