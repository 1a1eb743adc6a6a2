"""Sanity checks of the simulated checker itself (the test double all
integration tests lean on)."""

import pytest

from coqbridge.testing.engine import check_document, segment, strip_comments
from coqbridge.testing.server import default_stdlib

from .conftest import corpus_text


def load_library(logical):
    path = default_stdlib() / f"{logical}.v"
    if not path.is_file():
        return None
    result = check_document(path.read_text(encoding="utf-8"), load_library)
    return {"terms": result.own_terms, "notations": result.own_notations}


def check(text):
    return check_document(text, load_library)


def test_segmentation_of_listing():
    text = corpus_text("test.v")
    sentences = [text[s:e] for s, e in segment(text)]
    assert sentences[0] == "Require Import List."
    assert sentences.count("-") == 2
    assert len(sentences) == 13


def test_segmentation_skips_comments_and_strings():
    text = '(* one. two. *) Definition s := "dot. inside".\nDefinition t := 1.\n'
    sentences = [text[s:e] for s, e in segment(text)]
    assert len(sentences) == 2
    assert sentences[0].startswith("Definition s")


def test_segmentation_nested_comments():
    text = "(* a (* nested. *) b *) Definition x := 1.\n"
    spans = segment(text)
    assert len(spans) == 1


def test_qualified_names_not_sentence_ends():
    text = "Check Gamma.Delta.deep.\n"
    assert len(segment(text)) == 1


def test_strip_comments_preserves_strings():
    assert strip_comments('x (* c *) "(* s *)" y') == 'x   "(* s *)" y'


def test_listing_goal_chain():
    result = check(corpus_text("test.v"))
    assert result.diagnostics == []
    # state after `simpl.` in the base case
    base_simpl = result.states[6]
    assert base_simpl["goals"][0]["ty"] == "rev l2 = rev l2 ++ nil"
    # after `rewrite app_nil_r.`
    assert result.states[7]["goals"][0]["ty"] == "rev l2 = rev l2"
    # after `rewrite IHl1.` in the inductive case
    assert result.states[11]["goals"][0]["ty"] == (
        "(rev l2 ++ rev l1) ++ a0 :: nil = rev l2 ++ rev l1 ++ a0 :: nil")


def test_correct_completion_checks_clean():
    base = corpus_text("test.v").rsplit("\nAdmitted.", 1)[0]
    good = base + " rewrite app_assoc. reflexivity.\nQed.\n"
    assert check(good).diagnostics == []


def test_incorrect_completion_fails():
    base = corpus_text("test.v").rsplit("\nAdmitted.", 1)[0]
    bad = base + " reflexivity.\nQed.\n"
    messages = [d.message for d in check(bad).diagnostics]
    assert any("Unable to unify" in m for m in messages)
    assert any("incomplete proof" in m for m in messages)


def test_error_tolerance_defines_later_terms():
    result = check("Definition a := 1.\nnonsense here.\nDefinition b := a + 1.\n")
    assert len(result.diagnostics) == 1
    assert set(result.own_terms) == {"a", "b"}


def test_nested_proofs_close_inner_first():
    result = check(corpus_text("nested.v"))
    assert result.diagnostics == []
    assert set(result.own_terms) == {"addition", "inner_fact"}


def test_redefinition_rejected():
    result = check("Definition x := 1.\nDefinition x := 2.\n")
    assert any("already exists" in d.message for d in result.diagnostics)


def test_module_scoping():
    result = check(corpus_text("modules.v"))
    assert result.diagnostics == []
    assert "Gamma.Delta.deep" in result.own_terms


def test_unicode_file_checks_cleanly():
    result = check(corpus_text("unicode.v"))
    assert result.diagnostics == []


def test_broken_file_diagnostics():
    result = check(corpus_text("broken.v"))
    assert len(result.diagnostics) == 2
    assert "two" in result.own_terms


def test_unterminated_sentence_diagnosed():
    result = check("Definition x := 1.\nDefinition y := 2")
    assert any("not terminated" in d.message for d in result.diagnostics)


@pytest.mark.parametrize("tactic,ok", [
    ("reflexivity", True),
    ("auto", True),
    ("easy", True),
])
def test_trivial_equality_tactics(tactic, ok):
    text = f"Lemma t : 21 + 21 = 42.\nProof.\n{tactic}.\nQed.\n"
    assert (check(text).diagnostics == []) is ok


def test_exact_i_proves_true():
    assert check("Lemma t : True.\nProof.\nexact I.\nQed.\n").diagnostics == []


def test_reflexivity_cannot_prove_false_equality():
    result = check("Lemma x : 1 = 2.\nProof.\nreflexivity.\nQed.\n")
    assert len(result.diagnostics) == 2


def test_reflexivity_cannot_prove_false():
    result = check("Lemma x : False.\nProof.\nreflexivity.\nQed.\n")
    assert len(result.diagnostics) == 2


def test_stdlib_loads_without_errors():
    assert load_library("List") is not None
    assert load_library("Nonexistent") is None
