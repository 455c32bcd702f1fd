"""Field schema registry.

A schema classifies every extractable field by trust class (``interpretive``
fields require mandatory human review, ``quantitative`` fields are trusted
for automatic extraction) and defines its value semantics: value type,
canonical unit, allowed vocabulary, synonym mappings and, optionally, the
pattern rules used by the deterministic extraction backend.

Schema files are JSON documents with top-level keys ``schema_id``,
``version``, ``synonyms`` (global table) and ``fields`` (ordered array).
Unknown keys are rejected so typos fail loudly instead of silently changing
behaviour. Field order in the file is the export column order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DuplicateFieldId, InvalidFieldSpec, SchemaEmpty, SchemaParse

TRUST_CLASSES = ("interpretive", "quantitative")
VALUE_TYPES = ("categorical", "numeric", "boolean", "text")

_WS_RUN = re.compile(r"\s+")


def fold(text: str) -> str:
    """Case-fold and collapse internal whitespace; the synonym lookup key."""
    return _WS_RUN.sub(" ", text.strip()).casefold()


class SynonymTable:
    """Maps folded surface forms to canonical tokens.

    Canonical tokens are fixed points: looking one up yields itself. The
    constructor enforces this by inserting identity entries and rejecting
    tables where a canonical token is remapped elsewhere.
    """

    def __init__(self, entries: Mapping[str, str], scope: str = "global"):
        self.scope = scope
        folded: dict[str, str] = {}
        for surface, canonical in entries.items():
            if not isinstance(surface, str) or not isinstance(canonical, str):
                raise InvalidFieldSpec(
                    f"synonym entries must map text to text (scope {scope!r})"
                )
            folded[fold(surface)] = canonical
        for canonical in list(folded.values()):
            key = fold(canonical)
            existing = folded.get(key)
            if existing is not None and existing != canonical:
                raise InvalidFieldSpec(
                    f"canonical token {canonical!r} is remapped to {existing!r} "
                    f"(scope {scope!r}); canonical tokens must be fixed points"
                )
            folded[key] = canonical
        self.entries: dict[str, str] = folded

    def lookup(self, raw: str) -> str | None:
        return self.entries.get(fold(raw))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ExtractionRule:
    """One pattern rule for the deterministic backend.

    A literal space in ``pattern`` matches any whitespace run (reports wrap
    lines mid-sentence); ``" ?"`` likewise becomes an optional run. Spell a
    strict single space as ``\\x20``.

    ``template`` is a ``re.Match.expand`` template producing the raw value
    (may reference groups, e.g. ``\\g<value> \\g<unit>``). When omitted, the
    named group ``value`` is used if the pattern defines one, otherwise the
    whole match.
    """

    pattern: str
    template: str | None = None

    def compiled(self) -> re.Pattern[str]:
        source = self.pattern.replace(" ?", r"\s*").replace(" ", r"\s+")
        return re.compile(source)


@dataclass(frozen=True)
class FieldSpec:
    field_id: str
    label: str
    trust_class: str
    value_type: str
    canonical_unit: str | None = None
    allowed_values: tuple[str, ...] = ()
    synonyms: tuple[tuple[str, str], ...] = ()
    requires_review: bool = False
    extraction_rules: tuple[ExtractionRule, ...] = ()

    def synonym_table(self) -> SynonymTable:
        return SynonymTable(dict(self.synonyms), scope=self.field_id)


@dataclass(frozen=True)
class Schema:
    schema_id: str
    version: str
    fields: tuple[FieldSpec, ...]
    synonyms: SynonymTable
    field_index: Mapping[str, FieldSpec] = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(
            self, "field_index", {f.field_id: f for f in self.fields}
        )

    def field_ids(self) -> list[str]:
        return [f.field_id for f in self.fields]

    def get(self, field_id: str) -> FieldSpec | None:
        return self.field_index.get(field_id)


_TOP_KEYS = {"schema_id", "version", "synonyms", "fields"}
_FIELD_KEYS = {
    "field_id",
    "label",
    "trust_class",
    "value_type",
    "canonical_unit",
    "allowed_values",
    "synonyms",
    "requires_review",
    "extraction_rules",
}
_RULE_KEYS = {"pattern", "template"}


def _parse_rules(raw: object, field_id: str) -> tuple[ExtractionRule, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise InvalidFieldSpec(f"{field_id}: extraction_rules must be a list")
    rules = []
    for entry in raw:
        if not isinstance(entry, dict) or not _RULE_KEYS.issuperset(entry):
            raise InvalidFieldSpec(
                f"{field_id}: extraction rule entries allow keys {sorted(_RULE_KEYS)}"
            )
        pattern = entry.get("pattern")
        if not isinstance(pattern, str) or not pattern:
            raise InvalidFieldSpec(f"{field_id}: extraction rule needs a pattern")
        try:
            re.compile(pattern)
        except re.error as exc:
            raise InvalidFieldSpec(
                f"{field_id}: bad extraction pattern {pattern!r}: {exc}"
            ) from exc
        template = entry.get("template")
        if template is not None and not isinstance(template, str):
            raise InvalidFieldSpec(f"{field_id}: rule template must be text")
        rules.append(ExtractionRule(pattern=pattern, template=template))
    return tuple(rules)


def _parse_field(raw: object) -> FieldSpec:
    if not isinstance(raw, dict):
        raise InvalidFieldSpec("field entries must be objects")
    unknown = set(raw) - _FIELD_KEYS
    if unknown:
        raise SchemaParse(f"unknown field keys: {sorted(unknown)}")
    field_id = raw.get("field_id")
    if not isinstance(field_id, str) or not field_id:
        raise InvalidFieldSpec("field_id must be a non-empty token")
    label = raw.get("label")
    if not isinstance(label, str) or not label:
        raise InvalidFieldSpec(f"{field_id}: label must be non-empty text")
    trust_class = raw.get("trust_class")
    if trust_class not in TRUST_CLASSES:
        raise InvalidFieldSpec(
            f"{field_id}: trust_class must be one of {TRUST_CLASSES}"
        )
    value_type = raw.get("value_type")
    if value_type not in VALUE_TYPES:
        raise InvalidFieldSpec(
            f"{field_id}: value_type must be one of {VALUE_TYPES}"
        )

    canonical_unit = raw.get("canonical_unit")
    if canonical_unit is not None and not isinstance(canonical_unit, str):
        raise InvalidFieldSpec(f"{field_id}: canonical_unit must be text")
    if value_type == "numeric" and not canonical_unit:
        raise InvalidFieldSpec(f"{field_id}: numeric fields need a canonical_unit")

    allowed_raw = raw.get("allowed_values") or []
    if not isinstance(allowed_raw, list) or not all(
        isinstance(v, str) for v in allowed_raw
    ):
        raise InvalidFieldSpec(f"{field_id}: allowed_values must be a list of tokens")
    if value_type == "categorical" and not allowed_raw:
        raise InvalidFieldSpec(
            f"{field_id}: categorical fields need non-empty allowed_values"
        )

    synonyms_raw = raw.get("synonyms") or {}
    if not isinstance(synonyms_raw, dict):
        raise InvalidFieldSpec(f"{field_id}: synonyms must be an object")
    # Validates the fixed-point invariant as a side effect.
    SynonymTable(synonyms_raw, scope=field_id)

    requires_review = raw.get("requires_review")
    if requires_review is None:
        requires_review = trust_class == "interpretive"
    elif not isinstance(requires_review, bool):
        raise InvalidFieldSpec(f"{field_id}: requires_review must be boolean")

    return FieldSpec(
        field_id=field_id,
        label=label,
        trust_class=trust_class,
        value_type=value_type,
        canonical_unit=canonical_unit,
        allowed_values=tuple(allowed_raw),
        synonyms=tuple(sorted(synonyms_raw.items())),
        requires_review=requires_review,
        extraction_rules=_parse_rules(raw.get("extraction_rules"), field_id),
    )


def load_schema(source: bytes | str) -> Schema:
    """Parse and validate a schema document.

    Deterministic: identical bytes yield a structurally identical Schema.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaParse(f"schema file is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaParse(f"schema file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaParse("schema document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaParse(f"unknown top-level keys: {sorted(unknown)}")

    schema_id = doc.get("schema_id")
    if not isinstance(schema_id, str) or not schema_id:
        raise SchemaParse("schema_id must be a non-empty token")
    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise SchemaParse("version must be non-empty text")

    synonyms_raw = doc.get("synonyms") or {}
    if not isinstance(synonyms_raw, dict):
        raise SchemaParse("synonyms must be an object")
    table = SynonymTable(synonyms_raw, scope="global")

    fields_raw = doc.get("fields")
    if fields_raw is None or not isinstance(fields_raw, list):
        raise SchemaParse("fields must be an array")
    if not fields_raw:
        raise SchemaEmpty("schema defines no fields")

    specs: list[FieldSpec] = []
    seen: set[str] = set()
    for raw in fields_raw:
        spec = _parse_field(raw)
        if spec.field_id in seen:
            raise DuplicateFieldId(f"duplicate field_id {spec.field_id!r}")
        seen.add(spec.field_id)
        specs.append(spec)

    return Schema(
        schema_id=schema_id,
        version=version,
        fields=tuple(specs),
        synonyms=table,
    )


def review_surface(schema: Schema) -> list[FieldSpec]:
    """The fields that demand mandatory human review, in schema order."""
    return [f for f in schema.fields if f.requires_review]


def schema_to_dict(schema: Schema) -> dict:
    """Inverse of load_schema, for dumping a schema back to its file form."""
    return {
        "schema_id": schema.schema_id,
        "version": schema.version,
        "synonyms": dict(schema.synonyms.entries),
        "fields": [
            {
                "field_id": f.field_id,
                "label": f.label,
                "trust_class": f.trust_class,
                "value_type": f.value_type,
                "canonical_unit": f.canonical_unit,
                "allowed_values": list(f.allowed_values),
                "synonyms": dict(f.synonyms),
                "requires_review": f.requires_review,
                "extraction_rules": [
                    {"pattern": r.pattern, "template": r.template}
                    for r in f.extraction_rules
                ],
            }
            for f in schema.fields
        ],
    }


class SchemaRegistry:
    """Holds the schemas a running service can extract against."""

    def __init__(self, schemas: Iterable[Schema] = ()):
        self._schemas: dict[str, Schema] = {}
        for schema in schemas:
            self.register(schema)

    def register(self, schema: Schema) -> None:
        self._schemas[schema.schema_id] = schema

    def get(self, schema_id: str) -> Schema:
        from .errors import UnknownSchema

        schema = self._schemas.get(schema_id)
        if schema is None:
            raise UnknownSchema(f"no schema registered under {schema_id!r}")
        return schema

    def ids(self) -> list[str]:
        return sorted(self._schemas)
