from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from sonostruct.errors import EmptyDocument
from sonostruct.ingest import (
    ingest_bytes,
    ingest_text,
    segment_sentences,
    segment_text,
)


def sentences_of(text: str) -> list[str]:
    return [text[s:e] for s, e in segment_text(text)]


def test_doc_id_is_deterministic_content_hash():
    a = ingest_text(b"The uterus is normal.", "a.txt")
    b = ingest_text(b"The uterus is normal.", "b.txt")
    c = ingest_text(b"The uterus is enlarged.", "c.txt")
    assert a.doc_id == b.doc_id
    assert a.doc_id != c.doc_id
    assert a.doc_id.startswith("d") and len(a.doc_id) == 17


def test_empty_document_rejected():
    with pytest.raises(EmptyDocument):
        ingest_text(b"   \n\t  ", "blank.txt")


def test_ingest_bytes_dispatches_on_magic_and_extension():
    doc = ingest_bytes(b"Plain report text.", "report.txt")
    assert doc.media_type == "text/plain"
    assert doc.full_text() == "Plain report text."


def test_basic_sentence_split():
    text = "The uterus is normal. The left ovary is fixed. No free fluid is seen."
    assert sentences_of(text) == [
        "The uterus is normal.",
        "The left ovary is fixed.",
        "No free fluid is seen.",
    ]


@pytest.mark.parametrize(
    "text",
    [
        "The lesion measures approx. 4 mm in diameter.",
        "Seen by Dr. Smith yesterday.",
        "A cyst of 3 cm. diameter is noted.",
        "There is no. 2 catheter in place.",
        "Sites include e.g. the bladder wall.",
        "Mobility is reduced, i.e. Partially fixed.",
    ],
)
def test_abbreviations_do_not_split(text):
    assert sentences_of(text) == [text]


def test_split_requires_capital_or_digit_after_punctuation():
    text = "Measured at 3.5 mm today. next line stays joined."
    assert sentences_of(text) == [text]


def test_digit_can_start_a_sentence():
    text = "Dimensions follow. 40 x 20 mm was recorded."
    assert sentences_of(text) == [
        "Dimensions follow.",
        "40 x 20 mm was recorded.",
    ]


def test_exclamation_and_question_split_without_stoplist():
    text = "Urgent finding! Review now? Yes."
    assert sentences_of(text) == ["Urgent finding!", "Review now?", "Yes."]


def test_blank_lines_separate_blocks():
    text = "HEADER SECTION\n\nThe uterus is normal. all good"
    parts = sentences_of(text)
    assert parts[0] == "HEADER SECTION"
    assert parts[1] == "The uterus is normal. all good"


def test_sentence_offsets_are_global_and_exact(txt_corpus):
    corpus_dir, manifest = txt_corpus
    for filename in list(manifest["files"])[:10]:
        doc = ingest_bytes((corpus_dir / filename).read_bytes(), filename)
        text = doc.full_text()
        sentences = segment_sentences(doc)
        assert sentences
        previous_end = -1
        for s in sentences:
            assert text[s.start : s.end] == s.text
            assert s.start > previous_end or previous_end == -1
            assert s.start >= previous_end
            previous_end = s.end
            page = doc.page_for_offset(s.start)
            assert page.page_number == s.page_number


@given(st.text(alphabet=st.characters(codec="ascii"), min_size=0, max_size=400))
def test_segment_spans_are_disjoint_ascending_substrings(text):
    spans = segment_text(text)
    previous_end = 0
    for start, end in spans:
        assert 0 <= start < end <= len(text)
        assert start >= previous_end
        assert text[start:end].strip() == text[start:end]
        previous_end = end


@given(st.text(alphabet="aB .!?\n", min_size=0, max_size=200))
def test_segments_cover_all_non_whitespace(text):
    spans = segment_text(text)
    covered = set()
    for start, end in spans:
        covered.update(range(start, end))
    for i, ch in enumerate(text):
        if not ch.isspace():
            assert i in covered
