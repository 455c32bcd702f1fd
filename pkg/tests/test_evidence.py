from __future__ import annotations

from sonostruct.evidence import (
    METHOD_CASE,
    METHOD_EXACT,
    METHOD_UNANCHORED,
    METHOD_WHITESPACE,
    EvidenceAnchor,
    anchor_evidence,
    primary_span,
    sentence_at,
)
from sonostruct.ingest import ingest_text, segment_sentences

TEXT = (
    "The uterus is anteverted. The left ovary is fixed to the pelvic "
    "side wall. A 12 mm nodule is seen on the left uterosacral ligament."
)


def make_doc(text=TEXT):
    return ingest_text(text.encode(), "note.txt")


def test_exact_match_anchors_with_offsets():
    doc = make_doc()
    anchor = anchor_evidence(doc, "The left ovary is fixed to the pelvic side wall.")
    assert anchor.method == METHOD_EXACT
    assert anchor.anchored
    assert doc.full_text()[anchor.start : anchor.end] == anchor.text


def test_whitespace_normalized_match():
    doc = make_doc()
    anchor = anchor_evidence(doc, "The left  ovary is\nfixed to the pelvic side wall.")
    assert anchor.method == METHOD_WHITESPACE
    assert anchor.anchored
    assert doc.full_text()[anchor.start : anchor.end].split() == anchor.text.split()


def test_case_insensitive_match():
    doc = make_doc()
    anchor = anchor_evidence(doc, "THE LEFT OVARY IS FIXED TO THE PELVIC SIDE WALL.")
    assert anchor.method == METHOD_CASE
    assert anchor.anchored
    snippet = doc.full_text()[anchor.start : anchor.end]
    assert snippet.casefold() == anchor.text.casefold()


def test_exact_wins_over_looser_methods():
    doc = make_doc("alpha beta. ALPHA BETA.")
    anchor = anchor_evidence(doc, "ALPHA BETA.")
    assert anchor.method == METHOD_EXACT
    assert doc.full_text()[anchor.start : anchor.end] == "ALPHA BETA."


def test_earliest_occurrence_is_chosen():
    doc = make_doc("A nodule is seen. Later a nodule is seen again near a nodule.")
    anchor = anchor_evidence(doc, "nodule")
    assert anchor.start == doc.full_text().index("nodule")


def test_fabricated_evidence_is_unanchored():
    doc = make_doc()
    anchor = anchor_evidence(doc, "The right kidney is absent.")
    assert anchor.method == METHOD_UNANCHORED
    assert not anchor.anchored
    assert anchor.start is None and anchor.end is None


def test_blank_evidence_is_unanchored():
    doc = make_doc()
    assert anchor_evidence(doc, "").method == METHOD_UNANCHORED
    assert anchor_evidence(doc, "   ").method == METHOD_UNANCHORED


def test_anchor_text_is_stripped_claim():
    doc = make_doc()
    anchor = anchor_evidence(doc, "  The uterus is anteverted.  ")
    assert anchor.text == "The uterus is anteverted."
    assert anchor.method == METHOD_EXACT


def test_anchor_carries_page_number():
    doc = make_doc()
    anchor = anchor_evidence(doc, "The uterus is anteverted.")
    assert anchor.page_number == 1


def test_sentence_at_maps_offset_to_containing_sentence():
    doc = make_doc()
    sentences = segment_sentences(doc)
    target = doc.full_text().index("12 mm nodule")
    sentence = sentence_at(sentences, target)
    assert sentence is not None
    assert "12 mm nodule" in sentence.text


def test_sentence_at_outside_any_sentence():
    doc = make_doc()
    sentences = segment_sentences(doc)
    assert sentence_at(sentences, 10_000) is None


def test_primary_span_prefers_earliest_anchor():
    a = EvidenceAnchor("b", 30, 40, 1, METHOD_EXACT)
    b = EvidenceAnchor("a", 5, 12, 1, METHOD_WHITESPACE)
    c = EvidenceAnchor("z", None, None, None, METHOD_UNANCHORED)
    assert primary_span([a, b, c]) is b
    assert primary_span([c]) is None
    assert primary_span([]) is None
