"""The two canonical research workflows, transcribed nearly verbatim:
collecting per-step proof data, and driving repair attempts with
transactional proof edits."""

import pytest

from prooffile import (
    ClosedFileException,
    CoqAdd,
    CoqDelete,
    InvalidChangeException,
    ProofAppend,
    ProofFile,
    ProofPop,
    ProofStatus,
)


def test_data_collection_listing(test_v, config, capsys):
    with ProofFile(test_v, config) as pf:
        pf.exec(len(pf.steps))
        print(pf.context)
        for proof in pf.proofs:
            for step in proof.steps:
                print(step.text, step.ast, step.context, step.goals)
    out = capsys.readouterr().out
    assert "FileContext(" in out
    assert "rewrite app_nil_r." in out
    assert "List.app_nil_r" in out          # premise context printed
    assert "rev l2 = rev l2 ++ nil" in out  # goals printed
    assert "VernacExtend" in out            # ast printed


def test_proof_attempts_listing(test_v, config, capsys):
    incorrect = [" reflexivity.", "\nQed."]
    correct = [" rewrite app_assoc."] + incorrect
    original = test_v.read_bytes()
    with ProofFile(test_v, config) as pf:
        pf.exec(len(pf.steps))
        unproven = pf.unproven_proofs[0]
        for attempt in [incorrect, correct]:
            changes = [ProofPop()]  # the admitted-proof marker
            for s in attempt:
                changes.append(ProofAppend(s))
            try:
                pf.change_proof(unproven, changes)
                print("Proof succeeded!")
                break
            except InvalidChangeException:
                print("Proof attempt not valid.")
                assert test_v.read_bytes() == original
        assert pf.is_valid
        assert pf.proofs[0].status == ProofStatus.CLOSED
    out = capsys.readouterr().out
    assert out.splitlines() == ["Proof attempt not valid.", "Proof succeeded!"]
    assert b"Qed." in test_v.read_bytes()


def test_change_steps_with_wrapped_changes(test_v, config):
    with ProofFile(test_v, config) as pf:
        pf.exec(len(pf.steps))
        admitted = next(i for i, s in enumerate(pf.steps)
                        if s.text.strip() == "Admitted.")
        pf.change_steps([
            CoqDelete(admitted),
            CoqAdd(admitted - 1, " rewrite app_assoc. reflexivity.\nQed."),
        ])
        assert pf.is_valid
        assert pf.unproven_proofs == []


def test_operations_after_close_raise(test_v, config):
    pf = ProofFile(test_v, config)
    pf.close()
    pf.close()  # double-close is quiet
    with pytest.raises(ClosedFileException):
        pf.exec(1)
    with pytest.raises(ClosedFileException):
        pf.steps


def test_exceptions_map_one_to_one(test_v, config):
    import coqbridge
    assert InvalidChangeException is coqbridge.InvalidChangeError
    with ProofFile(test_v, config) as pf:
        pf.exec(len(pf.steps))
        with pytest.raises(InvalidChangeException):
            pf.add_step(0, "\nDefinition broken := not_a_thing.")


def test_save_vo_exposed(tmp_path, config):
    path = tmp_path / "solo.v"
    path.write_text("Definition alone := 1.\n", encoding="utf-8")
    with ProofFile(path, config) as pf:
        pf.save_vo()
    assert path.with_suffix(".vo").exists()


def test_behavioral_equivalence_with_core(test_v, config):
    from coqbridge import ProofDocument
    with ProofFile(test_v, config) as pf:
        pf.exec(len(pf.steps))
        bound = [(p.term.name, p.status, [s.step.text for s in p.steps])
                 for p in pf.proofs]
        bound_ctx = pf.context.snapshot()
    with ProofDocument(test_v, config) as doc:
        doc.exec(len(doc.steps))
        core = [(p.term.name, p.status, [s.step.text for s in p.steps])
                for p in doc.proofs]
        assert bound == core
        assert bound_ctx == doc.context.snapshot()
