"""Anchoring claimed evidence sentences to document text.

A backend returns, per field, the sentence it believes supports the
value. Anchoring locates that sentence in the source document and yields
a character span usable for highlighting. Matching tries three methods
in order, taking the earliest offset at the first method that hits:

1. exact: the claim occurs verbatim.
2. whitespace_normalized: tokens match with any whitespace runs between
   them (survives line wrapping).
3. case_insensitive: letter case may differ, whitespace must not.

A claim that matches none of these is kept as unanchored evidence; that
is a reviewable state, not an error.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass

from .ingest import Sentence, SourceDocument

METHOD_EXACT = "exact"
METHOD_WHITESPACE = "whitespace_normalized"
METHOD_CASE = "case_insensitive"
METHOD_UNANCHORED = "unanchored"


@dataclass(frozen=True)
class EvidenceAnchor:
    text: str
    start: int | None
    end: int | None
    page_number: int | None
    method: str

    @property
    def anchored(self) -> bool:
        return self.start is not None


def _unanchored(claim: str) -> EvidenceAnchor:
    return EvidenceAnchor(
        text=claim, start=None, end=None, page_number=None, method=METHOD_UNANCHORED
    )


def _anchor(document: SourceDocument, claim: str, start: int, end: int,
            method: str) -> EvidenceAnchor:
    return EvidenceAnchor(
        text=claim,
        start=start,
        end=end,
        page_number=document.page_for_offset(start).page_number,
        method=method,
    )


def anchor_evidence(document: SourceDocument, claim: str) -> EvidenceAnchor:
    claim = claim.strip()
    if not claim:
        return _unanchored(claim)
    text = document.full_text()

    idx = text.find(claim)
    if idx >= 0:
        return _anchor(document, claim, idx, idx + len(claim), METHOD_EXACT)

    tokens = claim.split()
    loose = re.compile(r"\s+".join(re.escape(t) for t in tokens))
    m = loose.search(text)
    if m:
        return _anchor(document, claim, m.start(), m.end(), METHOD_WHITESPACE)

    folded = re.compile(re.escape(claim), re.IGNORECASE)
    for m in folded.finditer(text):
        if m.group(0).casefold() == claim.casefold():
            return _anchor(document, claim, m.start(), m.end(), METHOD_CASE)
    return _unanchored(claim)


def sentence_at(sentences: list[Sentence], offset: int) -> Sentence | None:
    """The sentence whose span contains the offset, if any."""
    starts = [s.start for s in sentences]
    idx = bisect_right(starts, offset) - 1
    if idx < 0:
        return None
    sentence = sentences[idx]
    return sentence if offset < sentence.end else None


def primary_span(anchors: list[EvidenceAnchor]) -> EvidenceAnchor | None:
    """The anchored span with the lowest document offset."""
    anchored = [a for a in anchors if a.anchored]
    if not anchored:
        return None
    return min(anchored, key=lambda a: (a.start, a.end))
