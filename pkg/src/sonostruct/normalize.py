"""Semantic normalization of extracted values.

Three concerns live here: terminology canonicalization through a synonym
table (idempotent, so canonical tokens are fixed points), unit-aware
numeric conversion into each field's canonical unit, and vocabulary
mapping for categorical and boolean fields. Hedged wording is detected
before any mapping; a hedged value is never silently coerced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NumericParse, UnknownUnit, ValueOutOfVocabulary
from .schema import FieldSpec, SynonymTable, fold

DEFAULT_HEDGE_LEXICON = ("possible", "suspicious for", "cannot exclude")

LENGTH_FACTORS = {
    "mm": 1.0,
    "millimetre": 1.0,
    "millimeter": 1.0,
    "cm": 10.0,
    "centimetre": 10.0,
    "centimeter": 10.0,
    "m": 1000.0,
}
VOLUME_FACTORS = {
    "ml": 1.0,
    "cc": 1.0,
    "millilitre": 1.0,
    "milliliter": 1.0,
    "cm3": 1.0,
    "l": 1000.0,
    "litre": 1000.0,
    "liter": 1000.0,
}
_FAMILIES = (LENGTH_FACTORS, VOLUME_FACTORS)

YES_NO = {
    "yes": "yes",
    "y": "yes",
    "true": "yes",
    "present": "yes",
    "seen": "yes",
    "identified": "yes",
    "noted": "yes",
    "positive": "yes",
    "no": "no",
    "n": "no",
    "false": "no",
    "absent": "no",
    "not seen": "no",
    "not identified": "no",
    "negative": "no",
    "none": "no",
}

_QUANTITY_RE = re.compile(r"(?i)^([+-]?\d+(?:\.\d+)?)\s*([a-z][a-z0-9]*)?$")


@dataclass(frozen=True)
class NormalizedValue:
    value: float | str | None
    unit: str | None = None
    ambiguous_reason: str | None = None


def find_hedge(text: str, lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON) -> str | None:
    folded = fold(text)
    for cue in lexicon:
        if re.search(rf"(?<!\w){re.escape(fold(cue))}(?!\w)", folded):
            return cue
    return None


def canonicalize(table: SynonymTable, text: str) -> str:
    """Map a terminology mention to its canonical token.

    Unknown mentions come back folded, so the function is idempotent for
    every input.
    """
    mapped = table.lookup(text)
    return mapped if mapped is not None else fold(text)


def _family_for(unit: str) -> dict[str, float] | None:
    key = fold(unit)
    for family in _FAMILIES:
        if key in family:
            return family
    return None


def convert_quantity(value: float, unit: str, target_unit: str) -> float:
    family = _family_for(unit)
    if family is None or fold(target_unit) not in family:
        raise UnknownUnit(f"cannot convert {unit!r} to {target_unit!r}")
    return value * family[fold(unit)] / family[fold(target_unit)]


def parse_quantity(raw: str) -> tuple[float, str | None]:
    m = _QUANTITY_RE.match(raw.strip())
    if not m:
        raise NumericParse(f"not a numeric quantity: {raw!r}")
    return float(m.group(1)), m.group(2)


def normalize_numeric(spec: FieldSpec, raw: str) -> NormalizedValue:
    value, unit = parse_quantity(raw)
    if unit is None:
        unit = spec.canonical_unit
    converted = convert_quantity(value, unit, spec.canonical_unit)
    return NormalizedValue(value=converted, unit=spec.canonical_unit)


def _match_allowed(spec: FieldSpec, candidate: str) -> str | None:
    folded = fold(candidate)
    for allowed in spec.allowed_values:
        if folded == fold(allowed) or folded.replace(" ", "_") == allowed:
            return allowed
    return None


def normalize_categorical(spec: FieldSpec, raw: str) -> NormalizedValue:
    table = spec.synonym_table()
    mapped = table.lookup(raw)
    candidate = mapped if mapped is not None else raw
    allowed = _match_allowed(spec, candidate)
    if allowed is None:
        raise ValueOutOfVocabulary(
            f"{spec.field_id}: {raw!r} is not in the allowed vocabulary"
        )
    return NormalizedValue(value=allowed)


def normalize_boolean(spec: FieldSpec, raw: str) -> NormalizedValue:
    table = spec.synonym_table()
    mapped = table.lookup(raw)
    candidate = mapped if mapped is not None else raw
    verdict = YES_NO.get(fold(candidate))
    if verdict is None:
        raise ValueOutOfVocabulary(
            f"{spec.field_id}: {raw!r} does not resolve to yes or no"
        )
    return NormalizedValue(value=verdict)


def normalize_value(
    spec: FieldSpec,
    raw: str,
    hedge_lexicon: tuple[str, ...] = DEFAULT_HEDGE_LEXICON,
) -> NormalizedValue:
    """Normalize a raw extracted value for one field.

    Hedged wording short-circuits to an ambiguous result. Vocabulary
    misses raise ValueOutOfVocabulary; malformed numbers and unknown
    units raise NumericParse and UnknownUnit.
    """
    cue = find_hedge(raw, hedge_lexicon)
    if cue is not None:
        return NormalizedValue(
            value=None, ambiguous_reason=f"hedged wording: {cue!r}"
        )
    if spec.value_type == "numeric":
        return normalize_numeric(spec, raw)
    if spec.value_type == "categorical":
        return normalize_categorical(spec, raw)
    if spec.value_type == "boolean":
        return normalize_boolean(spec, raw)
    stripped = raw.strip()
    if not stripped:
        raise ValueOutOfVocabulary(f"{spec.field_id}: empty text value")
    return NormalizedValue(value=stripped)
