"""Extraction backends.

Two implementations of the same contract: given a text window and a
schema, return the fields found as raw values with their source
sentences. The rule backend runs each field's patterns and is fully
deterministic; the chat backend asks a chat-completion HTTP service to
fill the schema and parses its JSON reply.
"""

from __future__ import annotations

import json
import re

import httpx

from .errors import BackendUnreachable, ModelOutputUnparseable
from .extraction import FieldClaim
from .ingest import segment_text
from .schema import Schema

_FENCE_RE = re.compile(r"^```[a-zA-Z0-9]*\n(.*)\n```\s*$", re.DOTALL)


class RuleBasedBackend:
    """Pattern-rule extraction; no network, no surprises."""

    name = "rules"

    def extract(self, text: str, schema: Schema, repair: bool = False) -> dict[str, FieldClaim]:
        spans = segment_text(text)
        claims: dict[str, FieldClaim] = {}
        for spec in schema.fields:
            for rule in spec.extraction_rules:
                m = rule.compiled().search(text)
                if m is None:
                    continue
                if rule.template is not None:
                    raw = m.expand(rule.template)
                elif "value" in m.re.groupindex:
                    raw = m.group("value")
                else:
                    raw = m.group(0)
                if raw is None or not raw.strip():
                    continue
                claims[spec.field_id] = FieldClaim(
                    raw_value=raw.strip(),
                    evidence=_containing_span(text, spans, m.start()),
                )
                break
        return claims


def _containing_span(text: str, spans: list[tuple[int, int]], offset: int) -> str | None:
    for start, end in spans:
        if start <= offset < end:
            return text[start:end]
    return None


def build_prompt(text: str, schema: Schema, repair: bool) -> str:
    lines = [
        "Extract the fields below from the ultrasound report text.",
        "Reply with a single JSON object mapping field ids to objects of the",
        'form {"value": "<verbatim value from the text>", "evidence": "<the',
        'complete sentence the value came from>"}.',
        "Only include fields the text states. Copy values verbatim; do not",
        "convert units or resolve wording. No prose around the JSON.",
        "",
        "Fields:",
    ]
    for spec in schema.fields:
        entry = f"- {spec.field_id}: {spec.label} ({spec.value_type}"
        if spec.value_type == "numeric":
            entry += f", unit {spec.canonical_unit}"
        if spec.allowed_values:
            entry += ", one of " + "/".join(spec.allowed_values)
        entry += ")"
        lines.append(entry)
    if repair:
        lines += [
            "",
            "Your previous reply was not parseable JSON. Respond again with",
            "exactly one JSON object and nothing else.",
        ]
    lines += ["", "Report text:", text]
    return "\n".join(lines)


class ChatHttpBackend:
    """Chat-completion HTTP backend speaking a /api/chat wire protocol."""

    name = "chat"

    def __init__(
        self,
        base_url: str,
        model: str,
        timeout_s: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.model = model
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"),
            timeout=httpx.Timeout(timeout_s),
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def extract(self, text: str, schema: Schema, repair: bool = False) -> dict[str, FieldClaim]:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "user", "content": build_prompt(text, schema, repair)}
            ],
            "format": "structured",
            "stream": False,
        }
        try:
            response = self._client.post("/api/chat", json=payload)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"chat backend request failed: {exc}") from exc
        try:
            body = response.json()
            content = body["message"]["content"]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendUnreachable(
                f"chat backend returned a malformed envelope: {exc}"
            ) from exc
        return _claims_from_content(content, schema)


def _claims_from_content(content: str, schema: Schema) -> dict[str, FieldClaim]:
    if not isinstance(content, str):
        raise ModelOutputUnparseable("model reply content is not text")
    stripped = content.strip()
    fenced = _FENCE_RE.match(stripped)
    if fenced:
        stripped = fenced.group(1).strip()
    try:
        doc = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ModelOutputUnparseable(f"model reply is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelOutputUnparseable("model reply is not a JSON object")
    claims: dict[str, FieldClaim] = {}
    for field_id, entry in doc.items():
        if schema.get(field_id) is None:
            continue
        if entry is None:
            continue
        if isinstance(entry, (str, int, float, bool)):
            entry = {"value": entry}
        if not isinstance(entry, dict):
            raise ModelOutputUnparseable(
                f"field entry for {field_id!r} is not an object"
            )
        value = entry.get("value")
        if value is None or (isinstance(value, str) and not value.strip()):
            continue
        if isinstance(value, bool):
            value = "yes" if value else "no"
        evidence = entry.get("evidence")
        if evidence is not None and not isinstance(evidence, str):
            evidence = None
        claims[field_id] = FieldClaim(raw_value=str(value).strip(), evidence=evidence)
    return claims
