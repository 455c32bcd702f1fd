"""Document ingestion and sentence segmentation.

A source document is an ordered list of page texts with contiguous global
character offsets: page N+1 starts one character (a newline separator)
after page N ends, so a span anywhere in the document addresses the same
text via the document or the page. The document id is a content hash, so
re-ingesting identical bytes yields the same id.

Sentences split on sentence punctuation followed by whitespace and an
uppercase letter or digit, with an abbreviation stoplist; blank lines
always break, so headings without punctuation form their own sentence.
"""

from __future__ import annotations

import hashlib
import re
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyDocument
from .pdftext import extract_pdf_pages

PDF_MEDIA_TYPE = "application/pdf"
TEXT_MEDIA_TYPE = "text/plain"

ABBREVIATIONS = {"approx", "cm", "dr", "no", "e.g", "i.e"}

_PUNCT_RUN = re.compile(r"[.!?]+")
_TRAILING_TOKEN = re.compile(r"([A-Za-z]+(?:\.[A-Za-z]+)*)\Z")
_PARA_BREAK = re.compile(r"\n[ \t]*\n+")


@dataclass(frozen=True)
class PageText:
    page_number: int
    text: str
    start_offset: int

    @property
    def end_offset(self) -> int:
        return self.start_offset + len(self.text)


@dataclass(frozen=True)
class Sentence:
    text: str
    start: int
    end: int
    page_number: int


@dataclass
class SourceDocument:
    doc_id: str
    filename: str
    media_type: str
    pages: tuple[PageText, ...]

    def full_text(self) -> str:
        return "\n".join(p.text for p in self.pages)

    def page_for_offset(self, offset: int) -> PageText:
        starts = [p.start_offset for p in self.pages]
        idx = max(0, bisect_right(starts, offset) - 1)
        return self.pages[idx]


def _normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _make_document(filename: str, media_type: str, page_texts: list[str],
                   raw: bytes) -> SourceDocument:
    pages = []
    offset = 0
    for number, text in enumerate(page_texts, start=1):
        pages.append(PageText(page_number=number, text=text, start_offset=offset))
        offset += len(text) + 1
    doc = SourceDocument(
        doc_id="d" + hashlib.sha256(raw).hexdigest()[:16],
        filename=filename,
        media_type=media_type,
        pages=tuple(pages),
    )
    if not doc.full_text().strip():
        raise EmptyDocument(f"{filename}: document text is empty")
    return doc


def ingest_pdf(data: bytes, filename: str) -> SourceDocument:
    texts = [_normalize_newlines(t) for t in extract_pdf_pages(data)]
    return _make_document(filename, PDF_MEDIA_TYPE, texts, data)


def ingest_text(data: bytes, filename: str) -> SourceDocument:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError:
        text = data.decode("latin-1")
    return _make_document(filename, TEXT_MEDIA_TYPE, [_normalize_newlines(text)], data)


def ingest_bytes(data: bytes, filename: str) -> SourceDocument:
    if filename.lower().endswith(".pdf") or data.startswith(b"%PDF-"):
        return ingest_pdf(data, filename)
    return ingest_text(data, filename)


def ingest_file(path: Path | str) -> SourceDocument:
    path = Path(path)
    return ingest_bytes(path.read_bytes(), path.name)


def _block_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for m in _PARA_BREAK.finditer(text):
        spans.append((start, m.start()))
        start = m.end()
    spans.append((start, len(text)))
    return [(s, e) for s, e in spans if text[s:e].strip()]


def _split_block(text: str, start: int, end: int) -> list[tuple[int, int]]:
    bounds: list[tuple[int, int]] = []
    for m in _PUNCT_RUN.finditer(text, start, end):
        if m.end() >= end:
            break
        if not text[m.end()].isspace():
            continue
        follow = m.end()
        while follow < end and text[follow].isspace():
            follow += 1
        if follow >= end:
            break
        nxt = text[follow]
        if not (nxt.isdigit() or nxt.isupper()):
            continue
        if m.group(0) == ".":
            token = _TRAILING_TOKEN.search(text, start, m.start())
            if token and token.group(1).lower() in ABBREVIATIONS:
                continue
        bounds.append((m.end(), follow))
    spans = []
    cursor = start
    for stop, following in bounds:
        spans.append((cursor, stop))
        cursor = following
    spans.append((cursor, end))
    return spans


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def segment_text(text: str) -> list[tuple[int, int]]:
    """Sentence spans as (start, end) character offsets into text."""
    spans = []
    for block_start, block_end in _block_spans(text):
        for s, e in _split_block(text, block_start, block_end):
            s, e = _trim(text, s, e)
            if s < e:
                spans.append((s, e))
    return spans


def segment_sentences(document: SourceDocument) -> list[Sentence]:
    text = document.full_text()
    return [
        Sentence(
            text=text[s:e],
            start=s,
            end=e,
            page_number=document.page_for_offset(s).page_number,
        )
        for s, e in segment_text(text)
    ]
