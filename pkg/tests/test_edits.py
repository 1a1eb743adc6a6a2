import pytest

from coqbridge import (
    Add,
    CoqDocument,
    Delete,
    EmptyProofError,
    InvalidChangeError,
    ProofAppend,
    ProofDocument,
    ProofPop,
    ProofStatus,
    StepIndexError,
)

from .conftest import make_workspace, sim_config


@pytest.fixture
def pf(coq_file, config):
    with ProofDocument(coq_file, config) as doc:
        doc.exec(len(doc.steps))
        yield doc


def admitted_index(doc):
    return next(i for i, s in enumerate(doc.steps) if s.text.strip() == "Admitted.")


# --- add_step / delete_step -------------------------------------------------


def test_delete_admitted_reopens_proof(pf):
    pf.delete_step(admitted_index(pf))
    assert pf.is_valid
    assert "Admitted." not in pf.text
    assert pf.proofs[0].status == ProofStatus.OPEN
    assert [p.term.name for p in pf.open_proofs] == ["rev_append"]


def test_add_step_accepts_valid_tactic(pf):
    pf.delete_step(admitted_index(pf))
    last = len(pf.steps) - 1
    pf.add_step(last, " rewrite app_assoc.")
    assert pf.steps[-1].text == " rewrite app_assoc."
    assert pf.is_valid


def test_add_step_rejects_invalid_tactic_and_reverts(pf):
    original = pf.path.read_bytes()
    before_steps = [s.text for s in pf.steps]
    pf.delete_step(admitted_index(pf))
    after_delete = pf.path.read_bytes()
    with pytest.raises(InvalidChangeError):
        pf.add_step(len(pf.steps) - 1, " reflexivity.")
    assert pf.path.read_bytes() == after_delete
    assert pf.path.read_bytes() != original
    assert [s.text for s in pf.steps] == [t for t in before_steps
                                          if t.strip() != "Admitted."]


def test_add_comment_only_text_defines_no_steps(pf):
    count = len(pf.steps)
    pf.add_step(0, " (* reviewer note *)")
    assert len(pf.steps) == count
    assert "(* reviewer note *)" in pf.text
    assert pf.is_valid


def test_delete_require_is_invalid_change(pf):
    original = pf.path.read_bytes()
    with pytest.raises(InvalidChangeError) as info:
        pf.delete_step(0)
    assert pf.path.read_bytes() == original
    assert len(info.value.diagnostics) >= 1
    assert pf.is_valid


def test_add_then_delete_is_identity(pf):
    original = pf.text
    pf.add_step(0, "\nDefinition marker := 9.")
    assert pf.text != original
    inserted = next(i for i, s in enumerate(pf.steps)
                    if "marker" in s.text)
    pf.delete_step(inserted)
    assert pf.text == original


def test_index_out_of_range_is_precheck(pf):
    before = pf.text
    with pytest.raises(StepIndexError):
        pf.add_step(len(pf.steps), "x.")
    with pytest.raises(StepIndexError):
        pf.delete_step(len(pf.steps))
    with pytest.raises(StepIndexError):
        pf.change_steps([Add(0, "\nDefinition ok := 1."), Delete(99)])
    assert pf.text == before


def test_add_at_minus_one_prepends(pf):
    pf.add_step(-1, "(* header *)\n")
    assert pf.text.startswith("(* header *)")
    assert pf.is_valid


# --- change_steps transactions ------------------------------------------------


def test_qed_first_transaction_succeeds(pf):
    # Intermediate states are invalid (Qed before the missing tactics) but
    # the final state is valid, so the batch commits.
    admitted = admitted_index(pf)
    tail = admitted - 1
    pf.change_steps([
        Delete(admitted),
        Add(tail, "\nQed."),
        Add(tail, " reflexivity."),
        Add(tail, " rewrite app_assoc."),
    ])
    assert pf.is_valid
    assert pf.proofs[0].status == ProofStatus.CLOSED


def test_qed_first_fails_as_sequential_add_steps(pf):
    admitted = admitted_index(pf)
    pf.delete_step(admitted)
    tail = len(pf.steps) - 1
    with pytest.raises(InvalidChangeError):
        pf.add_step(tail, "\nQed.")  # incomplete proof: rejected on its own


def test_empty_transaction_is_noop(pf):
    before = (pf.text, pf.pointer, pf.context.snapshot())
    pf.change_steps([])
    assert (pf.text, pf.pointer, pf.context.snapshot()) == before


def test_failed_transaction_restores_everything(pf):
    original = pf.path.read_bytes()
    pointer = pf.pointer
    snapshot = pf.context.snapshot()
    proofs = [(p.term.name, p.status) for p in pf.proofs]
    with pytest.raises(InvalidChangeError):
        pf.change_steps([
            Add(0, "\nDefinition fine := 2."),
            Add(1, "\nDefinition broken := does_not_exist."),
        ])
    assert pf.path.read_bytes() == original
    assert pf.pointer == pointer
    assert pf.context.snapshot() == snapshot
    assert [(p.term.name, p.status) for p in pf.proofs] == proofs
    assert pf.is_valid


def test_edits_allowed_on_already_invalid_file(workspace, config):
    with CoqDocument(workspace / "broken.v", config) as doc:
        assert not doc.is_valid
        baseline = len(doc.errors())
        doc.add_step(len(doc.steps) - 1, "\nDefinition extra := one + 1.")
        assert "extra" in doc.text
        assert len(doc.errors()) == baseline
        with pytest.raises(InvalidChangeError):
            doc.add_step(0, "\nDefinition nope := missing_thing.")


def test_baseline_errors_matched_after_range_shift(workspace, config):
    # inserting before the existing errors moves their ranges; the
    # adjusted baseline must still absorb them (no spurious rollback)
    with CoqDocument(workspace / "broken.v", config) as doc:
        baseline = [d.message for d in doc.errors()]
        doc.add_step(-1, "Definition shifted := 1.\n")
        assert doc.text.startswith("Definition shifted")
        assert [d.message for d in doc.errors()] == baseline


def test_transaction_add_occupies_one_slot(tmp_path, config):
    from .conftest import make_workspace
    ws = make_workspace(tmp_path, {"two.v": "Definition a := 1.\nDefinition b := 2.\n"})
    with CoqDocument(ws / "two.v", config) as doc:
        # the two-sentence Add is one slot inside the transaction, so
        # Delete(2) still means the old step 1 ("b")
        doc.change_steps([
            Add(-1, "Definition x := 9. Definition y := 8.\n"),
            Delete(2),
        ])
        texts = [s.text.strip() for s in doc.steps]
        assert texts == ["Definition x := 9.", "Definition y := 8.",
                         "Definition a := 1."]


def test_pointer_clamps_when_executed_step_deleted(pf):
    assert pf.pointer == len(pf.steps) - 1
    pf.delete_step(admitted_index(pf))
    assert pf.pointer == len(pf.steps) - 1  # clamped to the surviving tail


def test_pointer_stays_when_edit_is_after_it(coq_file, config):
    with ProofDocument(coq_file, config) as doc:
        doc.exec(2)
        pointed = doc.steps[doc.pointer].text
        doc.add_step(len(doc.steps) - 1, "\nDefinition appended := 5.")
        assert doc.steps[doc.pointer].text == pointed
        assert doc.pointer == 1


def test_edit_before_pointer_keeps_step_identity(pf):
    pf.exec(-1)  # pointer on `rewrite IHl1.`
    pointed = pf.steps[pf.pointer].text
    pf.add_step(0, "\nDefinition early := 3.")
    assert pf.steps[pf.pointer].text == pointed
    assert pf.context.lookup("early") is not None  # new step is before the pointer


def test_in_memory_mode_never_touches_disk(coq_file):
    config = sim_config(write_through=False)
    original = coq_file.read_bytes()
    with ProofDocument(coq_file, config) as doc:
        doc.exec(len(doc.steps))
        doc.delete_step(admitted_index(doc))
        assert b"Admitted." not in doc.text.encode()
        assert coq_file.read_bytes() == original


def test_reopen_equivalence_after_successful_edit(pf, config):
    pf.delete_step(admitted_index(pf))
    pf.add_step(len(pf.steps) - 1, " rewrite app_assoc. reflexivity.\nQed.")
    with ProofDocument(pf.path, config) as fresh:
        fresh.exec(fresh.pointer + 1 or len(fresh.steps))
        fresh.exec(len(fresh.steps) - 1 - fresh.pointer)
        assert [s.text for s in fresh.steps] == [s.text for s in pf.steps]
        assert fresh.context.snapshot() == pf.context.snapshot()
        assert [(p.term.name, p.status, len(p.steps)) for p in fresh.proofs] == \
               [(p.term.name, p.status, len(p.steps)) for p in pf.proofs]


# --- proof-scoped edits ----------------------------------------------------------


def test_change_proof_listing_flow(pf):
    original = pf.path.read_bytes()
    unproven = pf.unproven_proofs[0]
    incorrect = [" reflexivity.", "\nQed."]
    correct = [" rewrite app_assoc."] + incorrect
    outcomes = []
    for attempt in [incorrect, correct]:
        changes = [ProofPop()] + [ProofAppend(s) for s in attempt]
        try:
            pf.change_proof(unproven, changes)
            outcomes.append("ok")
            break
        except InvalidChangeError:
            outcomes.append("invalid")
            assert pf.path.read_bytes() == original
    assert outcomes == ["invalid", "ok"]
    assert pf.is_valid
    assert pf.proofs[0].status == ProofStatus.CLOSED
    assert pf.unproven_proofs == []


def test_append_then_pop_identity(pf):
    proof = pf.proofs[0]
    before = pf.text
    sig = (proof.term.name, proof.status, [s.step.text for s in proof.steps])
    pf.pop_step(proof)
    pf.append_step(pf.proofs[0], "\nAdmitted.")
    assert pf.text == before
    proof = pf.proofs[0]
    assert (proof.term.name, proof.status, [s.step.text for s in proof.steps]) == sig


def test_pop_on_empty_proof_raises(tmp_path, config):
    ws = make_workspace(tmp_path, {
        "bare.v": "Lemma naked : True.\n",
    })
    with ProofDocument(ws / "bare.v", config) as doc:
        doc.exec(len(doc.steps))
        proof = doc.proofs[0]
        assert proof.steps == []
        with pytest.raises(EmptyProofError):
            doc.pop_step(proof)


def test_proof_edits_update_the_proof_record(pf):
    proof = pf.proofs[0]
    pf.change_proof(proof, [ProofPop(), ProofAppend(" idtac.")])
    proof = pf.proofs[0]
    assert proof.steps[-1].step.text == " idtac."
    assert proof.status == ProofStatus.OPEN
