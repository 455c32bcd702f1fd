"""Minimal PDF text-layer reader.

Reads page text from PDFs that carry a real text layer (system-generated
reports rather than scans). Covers the subset that needs: classic and
incrementally updated bodies, objects packed in object streams,
FlateDecode, and the text positioning and showing operators. Pages whose
content cannot be decoded (unsupported filters, encryption) contribute no
text; a document with no text-showing content at all is reported as
having no text layer.
"""

from __future__ import annotations

import base64
import re
import zlib
from dataclasses import dataclass

from .errors import MalformedPdf, NoTextLayer

_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"
_REGULAR = rb"[^\x00\t\n\x0c\r ()<>\[\]{}/%]"

_NUMBER_RE = re.compile(rb"[+-]?(?:\d+\.\d*|\.\d+|\d+)")
_REF_RE = re.compile(rb"(\d+)\s+(\d+)\s+R(?!" + _REGULAR + rb")")
_NAME_RE = re.compile(rb"/(" + _REGULAR + rb"*)")
_KEYWORD_RE = re.compile(_REGULAR + rb"+")
_OBJ_RE = re.compile(rb"(?<![0-9])(\d+)\s+(\d+)\s+obj(?!" + _REGULAR + rb")")

_STRING_ESCAPES = {
    ord("n"): b"\n",
    ord("r"): b"\r",
    ord("t"): b"\t",
    ord("b"): b"\b",
    ord("f"): b"\f",
}

# Kern adjustments at or below this (thousandths of text space) read as a
# word gap.
_KERN_SPACE = -180


class _Name(str):
    """Name token; kept distinct from text strings."""


class _Op(str):
    """Bare keyword inside a content stream."""


@dataclass(frozen=True)
class _Ref:
    num: int
    gen: int


@dataclass
class _Stream:
    meta: dict
    raw: bytes


class _Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self) -> None:
        data = self.data
        n = len(data)
        while self.pos < n:
            c = data[self.pos]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == 0x25:
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                return

    def parse(self, ops: bool = False):
        self.skip_ws()
        data = self.data
        if self.pos >= len(data):
            raise ValueError("unexpected end of data")
        c = data[self.pos]
        if c == 0x2F:
            return self._name()
        if c == 0x28:
            return self._literal_string()
        if c == 0x3C:
            if data.startswith(b"<<", self.pos):
                return self._dict(ops)
            return self._hex_string()
        if c == 0x5B:
            return self._array(ops)
        if c in b"+-." or 0x30 <= c <= 0x39:
            return self._number(ops)
        m = _KEYWORD_RE.match(data, self.pos)
        if not m:
            raise ValueError(f"unparseable byte {c:#x} at {self.pos}")
        self.pos = m.end()
        word = m.group(0)
        if word == b"true":
            return True
        if word == b"false":
            return False
        if word == b"null":
            return None
        return _Op(word.decode("latin-1"))

    def _number(self, ops: bool):
        data = self.data
        if not ops:
            ref = _REF_RE.match(data, self.pos)
            if ref:
                self.pos = ref.end()
                return _Ref(int(ref.group(1)), int(ref.group(2)))
        m = _NUMBER_RE.match(data, self.pos)
        if not m:
            raise ValueError(f"bad number at {self.pos}")
        self.pos = m.end()
        token = m.group(0)
        if b"." in token:
            return float(token)
        return int(token)

    def _name(self) -> _Name:
        m = _NAME_RE.match(self.data, self.pos)
        if not m:
            raise ValueError(f"bad name at {self.pos}")
        self.pos = m.end()
        raw = m.group(1)
        if b"#" in raw:
            raw = re.sub(
                rb"#([0-9A-Fa-f]{2})",
                lambda h: bytes([int(h.group(1), 16)]),
                raw,
            )
        return _Name(raw.decode("latin-1"))

    def _literal_string(self) -> bytes:
        data = self.data
        self.pos += 1
        depth = 1
        out = bytearray()
        n = len(data)
        while self.pos < n:
            c = data[self.pos]
            if c == 0x5C:
                self.pos += 1
                if self.pos >= n:
                    break
                e = data[self.pos]
                if e in _STRING_ESCAPES:
                    out += _STRING_ESCAPES[e]
                    self.pos += 1
                elif e in b"()\\":
                    out.append(e)
                    self.pos += 1
                elif e == 0x0D:
                    self.pos += 1
                    if self.pos < n and data[self.pos] == 0x0A:
                        self.pos += 1
                elif e == 0x0A:
                    self.pos += 1
                elif 0x30 <= e <= 0x37:
                    digits = bytearray()
                    while self.pos < n and len(digits) < 3 and 0x30 <= data[self.pos] <= 0x37:
                        digits.append(data[self.pos])
                        self.pos += 1
                    out.append(int(digits, 8) & 0xFF)
                else:
                    out.append(e)
                    self.pos += 1
            elif c == 0x28:
                depth += 1
                out.append(c)
                self.pos += 1
            elif c == 0x29:
                depth -= 1
                self.pos += 1
                if depth == 0:
                    return bytes(out)
                out.append(c)
            else:
                out.append(c)
                self.pos += 1
        raise ValueError("unterminated literal string")

    def _hex_string(self) -> bytes:
        end = self.data.find(b">", self.pos + 1)
        if end < 0:
            raise ValueError("unterminated hex string")
        digits = re.sub(rb"[^0-9A-Fa-f]", b"", self.data[self.pos + 1 : end])
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        return bytes.fromhex(digits.decode("ascii"))

    def _array(self, ops: bool) -> list:
        self.pos += 1
        out = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.data):
                raise ValueError("unterminated array")
            if self.data[self.pos] == 0x5D:
                self.pos += 1
                return out
            out.append(self.parse(ops))

    def _dict(self, ops: bool) -> dict:
        self.pos += 2
        out: dict = {}
        while True:
            self.skip_ws()
            if self.data.startswith(b">>", self.pos):
                self.pos += 2
                return out
            if self.pos >= len(self.data):
                raise ValueError("unterminated dictionary")
            key = self.parse(ops)
            if not isinstance(key, _Name):
                raise ValueError(f"dictionary key is not a name at {self.pos}")
            out[str(key)] = self.parse(ops)


def _flate(data: bytes) -> bytes:
    try:
        return zlib.decompress(data)
    except zlib.error:
        try:
            return zlib.decompressobj().decompress(data)
        except zlib.error as exc:
            raise ValueError(f"undecodable flate stream: {exc}") from exc


def _ascii85(data: bytes) -> bytes:
    body = data.strip()
    if body.startswith(b"<~"):
        body = body[2:]
    if body.endswith(b"~>"):
        body = body[:-2]
    try:
        return base64.a85decode(body)
    except ValueError as exc:
        raise ValueError(f"undecodable ascii85 stream: {exc}") from exc


def _asciihex(data: bytes) -> bytes:
    body = bytearray()
    for byte in data:
        if byte in b">":
            break
        if byte in b" \t\r\n\f\x00":
            continue
        body.append(byte)
    if len(body) % 2:
        body.append(ord("0"))
    try:
        return bytes.fromhex(body.decode("ascii"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise ValueError(f"undecodable asciihex stream: {exc}") from exc


def _resolve(objects: dict, obj, depth: int = 0):
    while isinstance(obj, _Ref):
        if depth > 32:
            raise ValueError("reference loop")
        obj = objects.get(obj.num)
        depth += 1
    return obj


def _decode_stream(stream: _Stream, objects: dict) -> bytes:
    filters = _resolve(objects, stream.meta.get("Filter"))
    if filters is None:
        filters = []
    elif not isinstance(filters, list):
        filters = [filters]
    parms = _resolve(objects, stream.meta.get("DecodeParms"))
    if isinstance(parms, dict) and _resolve(objects, parms.get("Predictor")) not in (None, 1):
        raise ValueError("predictor-coded streams are not supported")
    data = stream.raw
    for f in filters:
        name = str(_resolve(objects, f))
        if name in ("FlateDecode", "Fl"):
            data = _flate(data)
        elif name in ("ASCII85Decode", "A85"):
            data = _ascii85(data)
        elif name in ("ASCIIHexDecode", "AHx"):
            data = _asciihex(data)
        else:
            raise ValueError(f"unsupported stream filter {name}")
    return data


def _scan_objects(data: bytes) -> dict[int, object]:
    objects: dict[int, object] = {}
    for m in _OBJ_RE.finditer(data):
        lex = _Lexer(data, m.end())
        try:
            obj = lex.parse()
        except ValueError:
            continue
        if isinstance(obj, dict):
            lex.skip_ws()
            if data.startswith(b"stream", lex.pos):
                start = lex.pos + len(b"stream")
                if data.startswith(b"\r\n", start):
                    start += 2
                elif start < len(data) and data[start] in b"\r\n":
                    start += 1
                end = -1
                length = obj.get("Length")
                if isinstance(length, int) and start + length <= len(data):
                    tail = data[start + length : start + length + 20]
                    if tail.lstrip(_WHITESPACE).startswith(b"endstream"):
                        end = start + length
                if end < 0:
                    end = data.find(b"endstream", start)
                    if end < 0:
                        continue
                    raw = data[start:end]
                    if raw.endswith(b"\r\n"):
                        raw = raw[:-2]
                    elif raw.endswith((b"\n", b"\r")):
                        raw = raw[:-1]
                else:
                    raw = data[start:end]
                obj = _Stream(meta=obj, raw=raw)
        # Later definitions shadow earlier ones (incremental updates).
        objects[int(m.group(1))] = obj
    return objects


def _expand_object_streams(objects: dict) -> None:
    for obj in list(objects.values()):
        if not (isinstance(obj, _Stream) and obj.meta.get("Type") == _Name("ObjStm")):
            continue
        try:
            data = _decode_stream(obj, objects)
            count = _resolve(objects, obj.meta.get("N"))
            first = _resolve(objects, obj.meta.get("First"))
            if not isinstance(count, int) or not isinstance(first, int):
                continue
            header = _Lexer(data)
            pairs = []
            for _ in range(count):
                num = header.parse()
                offset = header.parse()
                pairs.append((num, offset))
        except ValueError:
            continue
        for num, offset in pairs:
            if not isinstance(num, int) or not isinstance(offset, int):
                continue
            if num in objects:
                continue
            try:
                objects[num] = _Lexer(data, first + offset).parse()
            except ValueError:
                continue


def _find_catalog(objects: dict) -> dict | None:
    for obj in objects.values():
        d = obj.meta if isinstance(obj, _Stream) else obj
        if isinstance(d, dict) and d.get("Type") == _Name("Catalog"):
            return d
    return None


def _collect_pages(objects: dict, node, out: list, seen: set) -> None:
    try:
        node = _resolve(objects, node)
    except ValueError:
        return
    if isinstance(node, _Stream):
        node = node.meta
    if not isinstance(node, dict):
        return
    node_type = node.get("Type")
    if node_type == _Name("Page"):
        out.append(node)
    elif node_type == _Name("Pages") or "Kids" in node:
        kids = _resolve(objects, node.get("Kids"))
        if not isinstance(kids, list):
            return
        for kid in kids:
            marker = kid.num if isinstance(kid, _Ref) else id(kid)
            if marker in seen:
                continue
            seen.add(marker)
            _collect_pages(objects, kid, out, seen)


def _page_content(objects: dict, page: dict) -> bytes:
    contents = _resolve(objects, page.get("Contents"))
    if contents is None:
        return b""
    streams = contents if isinstance(contents, list) else [contents]
    chunks = []
    for entry in streams:
        entry = _resolve(objects, entry)
        if isinstance(entry, _Stream):
            try:
                chunks.append(_decode_stream(entry, objects))
            except ValueError:
                continue
    return b"\n".join(chunks)


def _decode_text(raw: bytes) -> str:
    if raw.startswith(b"\xfe\xff"):
        return raw[2:].decode("utf-16-be", "replace")
    try:
        return raw.decode("cp1252")
    except UnicodeDecodeError:
        return raw.decode("latin-1")


def _content_text(content: bytes, show_counter: list) -> str:
    lex = _Lexer(content)
    stack: list = []
    parts: list[str] = []
    pending = 0

    def show(text: str) -> None:
        nonlocal pending
        show_counter[0] += 1
        if parts and pending:
            parts.append("\n" * pending)
        pending = 0
        parts.append(text)

    while True:
        lex.skip_ws()
        if lex.pos >= len(content):
            break
        try:
            token = lex.parse(ops=True)
        except ValueError:
            break
        if not isinstance(token, _Op):
            stack.append(token)
            continue
        op = str(token)
        if op == "Tj":
            if stack and isinstance(stack[-1], bytes):
                show(_decode_text(stack[-1]))
        elif op == "TJ":
            if stack and isinstance(stack[-1], list):
                buf = []
                for item in stack[-1]:
                    if isinstance(item, bytes):
                        buf.append(_decode_text(item))
                    elif isinstance(item, (int, float)) and item <= _KERN_SPACE:
                        buf.append(" ")
                show("".join(buf))
        elif op == "'":
            pending += 1
            if stack and isinstance(stack[-1], bytes):
                show(_decode_text(stack[-1]))
        elif op == '"':
            pending += 1
            if stack and isinstance(stack[-1], bytes):
                show(_decode_text(stack[-1]))
        elif op == "T*":
            pending += 1
        elif op in ("Td", "TD"):
            if len(stack) >= 2 and isinstance(stack[-1], (int, float)) and stack[-1] != 0:
                pending += 1
        elif op in ("BT", "Tm"):
            pending = max(pending, 1)
        elif op == "BI":
            idx = content.find(b"EI", lex.pos)
            lex.pos = len(content) if idx < 0 else idx + 2
        stack.clear()
    return "".join(parts)


def extract_pdf_pages(data: bytes) -> list[str]:
    """Text of each page, in page-tree order.

    Raises MalformedPdf when the file is not a readable PDF and
    NoTextLayer when no page shows any text.
    """
    if b"%PDF-" not in data[:1024]:
        raise MalformedPdf("missing %PDF header")
    objects = _scan_objects(data)
    if not objects:
        raise MalformedPdf("no readable objects")
    _expand_object_streams(objects)
    catalog = _find_catalog(objects)
    if catalog is None:
        raise MalformedPdf("no document catalog")
    pages: list[dict] = []
    _collect_pages(objects, catalog.get("Pages"), pages, set())
    if not pages:
        raise MalformedPdf("document has no pages")
    shows = [0]
    texts = [_content_text(_page_content(objects, page), shows) for page in pages]
    if shows[0] == 0:
        raise NoTextLayer("no text-showing content on any page")
    return texts
