from __future__ import annotations

import io

import pytest
from reportlab.lib.pagesizes import A4
from reportlab.pdfgen import canvas

from sonostruct.errors import MalformedPdf, NoTextLayer
from sonostruct.pdftext import extract_pdf_pages


def render_pdf(pages: list[list[str]]) -> bytes:
    buffer = io.BytesIO()
    c = canvas.Canvas(buffer, pagesize=A4)
    for lines in pages:
        text = c.beginText(40, A4[1] - 40)
        for line in lines:
            text.textLine(line)
        c.drawText(text)
        c.showPage()
    c.save()
    return buffer.getvalue()


def manual_pdf(content: bytes) -> bytes:
    """A minimal uncompressed one-page PDF around the given content stream."""
    return b"\n".join(
        [
            b"%PDF-1.4",
            b"1 0 obj << /Type /Catalog /Pages 2 0 R >> endobj",
            b"2 0 obj << /Type /Pages /Kids [3 0 R] /Count 1 >> endobj",
            b"3 0 obj << /Type /Page /Parent 2 0 R /Contents 4 0 R >> endobj",
            b"4 0 obj << /Length %d >> stream" % len(content),
            content,
            b"endstream endobj",
            b"%%EOF",
        ]
    )


def test_single_page_round_trip():
    data = render_pdf([["First line.", "Second line."]])
    pages = extract_pdf_pages(data)
    assert len(pages) == 1
    assert "First line." in pages[0]
    assert pages[0].index("First line.") < pages[0].index("Second line.")


def test_multi_page_order():
    data = render_pdf([["page one text"], ["page two text"]])
    pages = extract_pdf_pages(data)
    assert len(pages) == 2
    assert "page one text" in pages[0]
    assert "page two text" in pages[1]


def test_lines_joined_with_newlines():
    data = render_pdf([["alpha", "beta", "gamma"]])
    page = extract_pdf_pages(data)[0]
    assert ["alpha", "beta", "gamma"] == [
        line for line in page.splitlines() if line.strip()
    ]


def test_not_a_pdf_rejected():
    with pytest.raises(MalformedPdf):
        extract_pdf_pages(b"plain text, no header")


def test_header_without_objects_rejected():
    with pytest.raises(MalformedPdf):
        extract_pdf_pages(b"%PDF-1.4\nnothing else here")


def test_page_without_text_ops_is_no_text_layer():
    data = manual_pdf(b"0 0 100 100 re f")
    with pytest.raises(NoTextLayer):
        extract_pdf_pages(data)


def test_tj_and_tj_array_with_kerning():
    content = b"BT /F1 12 Tf (Hello ) Tj [(wor) 5 (ld) -400 (now)] TJ ET"
    page = extract_pdf_pages(manual_pdf(content))[0]
    assert "Hello world now" in page


def test_td_moves_start_new_lines():
    content = b"BT /F1 12 Tf (top) Tj 0 -14 Td (bottom) Tj ET"
    page = extract_pdf_pages(manual_pdf(content))[0]
    assert page.splitlines()[0].strip() == "top"
    assert "bottom" in page.splitlines()[1]


def test_quote_operators_start_new_lines():
    content = b"BT /F1 12 Tf (a) Tj T* (b) ' ET"
    page = extract_pdf_pages(manual_pdf(content))[0]
    lines = [line for line in page.splitlines() if line]
    assert lines == ["a", "b"]


def test_escapes_and_hex_strings():
    content = rb"BT (paren \(x\) and \\slash) Tj (\110i) Tj <20414243> Tj ET"
    page = extract_pdf_pages(manual_pdf(content))[0]
    assert "paren (x) and \\slash" in page
    assert "Hi" in page
    assert " ABC" in page


def test_hedge_phrase_survives_pdf_round_trip():
    data = render_pdf([["Cannot exclude an endometrioma in the left ovary."]])
    page = extract_pdf_pages(data)[0]
    assert "Cannot exclude an endometrioma" in page
