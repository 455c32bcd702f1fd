"""Built-in schema for transvaginal ultrasound reports in an endometriosis
workup.

Five interpretive assessments (disease type, uterosacral nodularity on each
side, pouch of Douglas obliteration, bowel involvement) carry mandatory
review; the remaining fields are quantitative measurements and per-site
findings trusted for automatic extraction. The schema is built as a plain
document and loaded through the same validation path as user-supplied
schema files, so everything expressible here round-trips through a file.
"""

from __future__ import annotations

import json
from functools import lru_cache

from .schema import Schema, load_schema

DEFAULT_SCHEMA_ID = "tvus_endometriosis"
DEFAULT_SCHEMA_VERSION = "1.0"

INTERPRETIVE_FIELD_IDS = (
    "endometriosis_type",
    "right_usl_nodules",
    "left_usl_nodules",
    "pod_obliteration",
    "bowel_die",
)

DIE_SITES = (
    "bladder",
    "uterovesical_fold",
    "anterior_abdominal_wall",
    "vaginal_vault",
    "posterior_vaginal_fornix",
    "rectovaginal_septum",
    "anterior_rectal_wall",
    "rectosigmoid_junction",
    "sigmoid_colon",
    "cecum",
    "appendix",
    "terminal_ileum",
    "right_uterosacral_ligament",
    "left_uterosacral_ligament",
    "right_parametrium",
    "left_parametrium",
    "right_ureter",
    "left_ureter",
    "right_round_ligament",
    "left_round_ligament",
    "right_pelvic_sidewall",
    "left_pelvic_sidewall",
    "right_ovarian_fossa",
    "left_ovarian_fossa",
)

TENDERNESS_REGIONS = (
    "uterine",
    "cervical_motion",
    "right_adnexal",
    "left_adnexal",
    "pod",
    "bladder",
    "right_usl",
    "left_usl",
)

GLOBAL_SYNONYMS = {
    "pod": "pouch_of_douglas",
    "pouch of douglas": "pouch_of_douglas",
    "douglas pouch": "pouch_of_douglas",
    "cul-de-sac": "pouch_of_douglas",
    "posterior cul-de-sac": "pouch_of_douglas",
    "pod obliteration": "pouch_of_douglas_obliteration",
    "obliterated pouch of douglas": "pouch_of_douglas_obliteration",
    "obliteration of the pouch of douglas": "pouch_of_douglas_obliteration",
    "mass": "lesion",
    "nodule": "lesion",
    "die": "deep_infiltrating_endometriosis",
    "deep infiltrating endometriosis": "deep_infiltrating_endometriosis",
    "deep endometriosis": "deep_infiltrating_endometriosis",
    "chocolate cyst": "endometrioma",
    "endometriotic cyst": "endometrioma",
    "usl": "uterosacral_ligament",
    "uterosacral ligament": "uterosacral_ligament",
}

_NUM = r"\d+(?:\.\d+)?"
_HEDGE_OPT = r"(?:possible |suspicious for |cannot exclude (?:an? )?)?"


def _rule(pattern: str, template: str | None = None) -> dict:
    return {"pattern": pattern, "template": template}


def _numeric(field_id: str, label: str, unit: str, rules: list | None = None) -> dict:
    return {
        "field_id": field_id,
        "label": label,
        "trust_class": "quantitative",
        "value_type": "numeric",
        "canonical_unit": unit,
        "extraction_rules": rules or [],
    }


def _boolean(field_id: str, label: str, synonyms: dict | None = None,
             rules: list | None = None) -> dict:
    return {
        "field_id": field_id,
        "label": label,
        "trust_class": "quantitative",
        "value_type": "boolean",
        "synonyms": synonyms or {},
        "extraction_rules": rules or [],
    }


def _categorical(field_id: str, label: str, allowed: list, synonyms: dict,
                 rules: list | None = None, trust: str = "quantitative") -> dict:
    return {
        "field_id": field_id,
        "label": label,
        "trust_class": trust,
        "value_type": "categorical",
        "allowed_values": allowed,
        "synonyms": synonyms,
        "extraction_rules": rules or [],
    }


def _triplet(prefix: str, pattern_head: str) -> list[dict]:
    """Three fields measured in one sentence: L x W x AP plus a unit."""
    pattern = (
        rf"(?i)\b{pattern_head} "
        rf"(?P<l>{_NUM}) ?(?:x|by) ?(?P<w>{_NUM}) ?(?:x|by) ?(?P<a>{_NUM}) "
        rf"?(?P<unit>mm|cm)"
    )
    out = []
    for suffix, group, axis in (
        ("length_mm", "l", "length"),
        ("width_mm", "w", "width"),
        ("ap_mm", "a", "AP diameter"),
    ):
        out.append(
            _numeric(
                f"{prefix}_{suffix}",
                f"{prefix.replace('_', ' ').capitalize()} {axis} (mm)",
                "mm",
                [_rule(pattern, rf"\g<{group}> \g<unit>")],
            )
        )
    return out


def _yes_no_cat(field_id: str, label: str, synonyms: dict,
                rules: list, trust: str = "quantitative") -> dict:
    base = {"not assessed": "not_reported"}
    base.update(synonyms)
    return _categorical(
        field_id, label, ["yes", "no", "not_reported"], base, rules, trust
    )


def _interpretive_fields() -> list[dict]:
    fields = [
        _categorical(
            "endometriosis_type",
            "Endometriosis type",
            ["none", "superficial", "ovarian", "deep_infiltrating", "not_reported"],
            {
                "deep infiltrating endometriosis": "deep_infiltrating",
                "superficial endometriosis": "superficial",
                "ovarian endometriosis": "ovarian",
                "no evidence of endometriosis": "none",
                "not assessed": "not_reported",
            },
            [
                _rule(r"(?i)\bno (?:sonographic )?evidence of endometriosis", "none"),
                _rule(r"(?i)\b(?P<value>(?:possible |suspicious for )?deep infiltrating endometriosis)"),
                _rule(r"(?i)\b(?P<value>(?:possible |suspicious for )?superficial endometriosis)"),
                _rule(r"(?i)\b(?P<value>(?:possible |suspicious for )?ovarian endometriosis)"),
            ],
            trust="interpretive",
        )
    ]
    for side in ("right", "left"):
        fields.append(
            _yes_no_cat(
                f"{side}_usl_nodules",
                f"{side.capitalize()} uterosacral ligament nodules",
                {
                    "nodule": "yes",
                    "nodules": "yes",
                    "nodularity": "yes",
                    "smooth": "no",
                    "unremarkable": "no",
                    "normal": "no",
                },
                [
                    _rule(
                        rf"(?i)\bno nodul(?:es?|arity)[^.]*\b{side} uterosacral ligament",
                        "no",
                    ),
                    _rule(
                        rf"(?i)\b{side} uterosacral ligament (?:is|appears) "
                        rf"(?P<value>smooth|unremarkable|normal)"
                    ),
                    _rule(
                        rf"(?i)\b(?P<value>{_HEDGE_OPT}nodul(?:es?|arity))"
                        rf"[^.]*\b{side} uterosacral ligament"
                    ),
                ],
                trust="interpretive",
            )
        )
    fields.append(
        _yes_no_cat(
            "pod_obliteration",
            "Pouch of Douglas obliteration",
            {
                "obliterated": "yes",
                "obliteration": "yes",
                "complete obliteration": "yes",
                "partial obliteration": "yes",
                "clear": "no",
                "free": "no",
                "open": "no",
                "mobile": "no",
            },
            [
                _rule(r"(?i)\bno (?:pod|pouch of douglas) obliteration", "no"),
                _rule(
                    r"(?i)\b(?:pod|pouch of douglas) (?:is |appears )?"
                    r"(?P<value>clear|free|open|mobile|obliterated)"
                ),
                _rule(
                    r"(?i)\b(?P<value>(?:possible |suspicious for )?"
                    r"(?:complete |partial )?obliteration) of the "
                    r"(?:pod|pouch of douglas)"
                ),
                _rule(
                    r"(?i)\b(?:pod|pouch of douglas) obliteration "
                    r"(?:is )?(?:noted|present|demonstrated)",
                    "yes",
                ),
            ],
            trust="interpretive",
        )
    )
    fields.append(
        _yes_no_cat(
            "bowel_die",
            "Bowel deep infiltrating endometriosis",
            {"bowel deep infiltrating endometriosis": "yes"},
            [
                _rule(r"(?i)\bno bowel deep (?:infiltrating )?endometriosis", "no"),
                _rule(r"(?i)\bbowel is free of deep (?:infiltrating )?endometriosis", "no"),
                _rule(r"(?i)\b(?P<value>(?:possible |suspicious for )?bowel deep infiltrating endometriosis)"),
                _rule(
                    r"(?i)\bdeep (?:infiltrating )?endometriosis involv(?:es|ing) "
                    r"the (?:rectosigmoid )?bowel",
                    "yes",
                ),
            ],
            trust="interpretive",
        )
    )
    return fields


def _uterus_fields() -> list[dict]:
    fields = _triplet("uterus", r"uterus (?:measures|is)")
    fields.append(
        _numeric(
            "uterus_volume_ml",
            "Uterine volume (ml)",
            "ml",
            [_rule(rf"(?i)\buterine volume (?:is|of) (?P<value>{_NUM}) ?(?P<unit>ml|cc)")],
        )
    )
    fields.append(
        _numeric(
            "endometrial_thickness_mm",
            "Endometrial thickness (mm)",
            "mm",
            [
                _rule(
                    rf"(?i)\bendometrial thickness (?:is|measures|of) "
                    rf"(?P<value>{_NUM}) ?(?P<unit>mm|cm)"
                ),
                _rule(rf"(?i)\bendometrium measures (?P<value>{_NUM}) ?(?P<unit>mm|cm)"),
            ],
        )
    )
    fields.append(
        _numeric(
            "cervix_length_mm",
            "Cervical length (mm)",
            "mm",
            [_rule(rf"(?i)\bcervix (?:measures|is) (?P<value>{_NUM}) ?(?P<unit>mm|cm)")],
        )
    )
    fields.append(
        _numeric(
            "junctional_zone_thickness_mm",
            "Junctional zone thickness (mm)",
            "mm",
            [
                _rule(
                    rf"(?i)\bjunctional zone (?:measures|thickness is) "
                    rf"(?P<value>{_NUM}) ?(?P<unit>mm|cm)"
                )
            ],
        )
    )
    return fields


def _ovary_fields() -> list[dict]:
    fields: list[dict] = []
    for side in ("right", "left"):
        fields.extend(_triplet(f"{side}_ovary", rf"{side} ovary measures"))
        fields.append(
            _numeric(
                f"{side}_ovary_volume_ml",
                f"{side.capitalize()} ovarian volume (ml)",
                "ml",
                [
                    _rule(
                        rf"(?i)\b{side} ovarian volume (?:is|of) "
                        rf"(?P<value>{_NUM}) ?(?P<unit>ml|cc)"
                    )
                ],
            )
        )
    for side in ("right", "left"):
        fields.append(
            _categorical(
                f"{side}_ovary_mobility",
                f"{side.capitalize()} ovary mobility",
                ["normal", "reduced", "fixed", "not_reported"],
                {
                    "freely mobile": "normal",
                    "mobile": "normal",
                    "fixed": "fixed",
                    "not assessed": "not_reported",
                },
                [
                    _rule(rf"(?i)\b{side} ovary is (?P<value>freely mobile|mobile|fixed)"),
                    _rule(rf"(?i)\b{side} ovary shows (?P<value>reduced) mobility"),
                ],
            )
        )
    for side in ("right", "left"):
        fields.append(
            _boolean(
                f"{side}_endometrioma_present",
                f"{side.capitalize()} ovarian endometrioma present",
                {"endometrioma": "yes"},
                [
                    _rule(rf"(?i)\bno endometrioma[^.]*\b{side} ovary", "no"),
                    _rule(
                        rf"(?i)\b(?P<value>{_HEDGE_OPT}endometrioma)[^.]*\b{side} ovary"
                    ),
                ],
            )
        )
        fields.append(
            _numeric(
                f"{side}_endometrioma_max_mm",
                f"{side.capitalize()} endometrioma maximum diameter (mm)",
                "mm",
                [
                    _rule(
                        rf"(?i)\b(?P<value>{_NUM}) ?(?P<unit>mm|cm) "
                        rf"endometrioma[^.]*\b{side} ovary",
                        r"\g<value> \g<unit>",
                    )
                ],
            )
        )
        fields.append(
            _numeric(
                f"{side}_endometrioma_volume_ml",
                f"{side.capitalize()} endometrioma volume (ml)",
                "ml",
                [
                    _rule(
                        rf"(?i)\b{side} endometrioma volume (?:is|of) "
                        rf"(?P<value>{_NUM}) ?(?P<unit>ml|cc)"
                    )
                ],
            )
        )
    return fields


def _misc_fields() -> list[dict]:
    return [
        _boolean(
            "kissing_ovaries",
            "Kissing ovaries",
            {"kissing ovaries": "yes"},
            [
                _rule(r"(?i)\bno kissing ovaries", "no"),
                _rule(r"(?i)\bovaries are separate", "no"),
                _rule(r"(?i)\b(?P<value>(?:possible )?kissing ovaries)"),
            ],
        ),
        _categorical(
            "uterine_sliding_sign",
            "Uterine sliding sign",
            ["positive", "negative", "not_reported"],
            {
                "preserved": "positive",
                "absent": "negative",
                "not assessed": "not_reported",
            },
            [_rule(r"(?i)\bsliding sign is (?P<value>positive|negative|preserved|absent)")],
        ),
        _boolean(
            "adenomyosis_present",
            "Adenomyosis present",
            {"adenomyosis": "yes"},
            [
                _rule(r"(?i)\bno (?:features of )?adenomyosis", "no"),
                _rule(r"(?i)\b(?P<value>(?:possible |suspicious for )?adenomyosis)"),
            ],
        ),
        _boolean(
            "pod_free_fluid_present",
            "Free fluid in the pouch of Douglas",
            {"free fluid": "yes"},
            [
                _rule(r"(?i)\bno free fluid[^.]*\b(?:pod|pouch of douglas)", "no"),
                _rule(r"(?i)\b(?P<value>(?:possible )?free fluid)[^.]*\b(?:pod|pouch of douglas)"),
            ],
        ),
        _numeric(
            "pod_free_fluid_volume_ml",
            "Pouch of Douglas free fluid volume (ml)",
            "ml",
            [_rule(rf"(?i)\bfree fluid volume (?:is|of) (?P<value>{_NUM}) ?(?P<unit>ml|cc)")],
        ),
    ]


_RULE_SITES = {"bladder", "rectovaginal_septum", "sigmoid_colon"}


def _site_fields() -> list[dict]:
    fields: list[dict] = []
    for site in DIE_SITES:
        phrase = site.replace("_", " ")
        title = phrase.capitalize()
        present_rules = []
        dim_rules: dict[str, list] = {"l": [], "w": [], "d": []}
        if site in _RULE_SITES:
            present_rules = [
                _rule(rf"(?i)\bno nodules?[^.]*\b{phrase}", "no"),
                _rule(rf"(?i)\b(?P<value>{_HEDGE_OPT}nodules?)[^.]*\b{phrase}"),
            ]
            dim_pattern = (
                rf"(?i)\b(?P<l>{_NUM}) ?x ?(?P<w>{_NUM}) ?x ?(?P<d>{_NUM}) "
                rf"?(?P<unit>mm|cm) nodule[^.]*\b{phrase}"
            )
            for group in dim_rules:
                dim_rules[group] = [_rule(dim_pattern, rf"\g<{group}> \g<unit>")]
        fields.append(
            _boolean(
                f"{site}_nodule_present",
                f"{title} nodule present",
                {"nodule": "yes", "nodules": "yes"},
                present_rules,
            )
        )
        for suffix, group, axis in (
            ("nodule_length_mm", "l", "nodule length"),
            ("nodule_width_mm", "w", "nodule width"),
            ("nodule_depth_mm", "d", "nodule depth"),
        ):
            fields.append(
                _numeric(
                    f"{site}_{suffix}", f"{title} {axis} (mm)", "mm", dim_rules[group]
                )
            )
        fields.append(
            _numeric(
                f"{site}_nodule_volume_ml", f"{title} nodule volume (ml)", "ml"
            )
        )
    return fields


_RULE_TENDERNESS = {"uterine": "uterus", "right_adnexal": "right adnexa",
                    "left_adnexal": "left adnexa"}


def _tenderness_fields() -> list[dict]:
    fields = []
    for region in TENDERNESS_REGIONS:
        title = region.replace("_", " ").capitalize()
        rules = []
        phrase = _RULE_TENDERNESS.get(region)
        if phrase:
            rules = [
                _rule(rf"(?i)\bno tenderness over the {phrase}", "no"),
                _rule(rf"(?i)\b(?:site-specific )?tenderness over the {phrase}", "yes"),
            ]
        fields.append(
            _boolean(f"{region}_tenderness", f"{title} tenderness", {}, rules)
        )
    return fields


def build_default_document() -> dict:
    """The default schema in its file form."""
    fields = (
        _interpretive_fields()
        + _uterus_fields()
        + _ovary_fields()
        + _misc_fields()
        + _site_fields()
        + _tenderness_fields()
    )
    return {
        "schema_id": DEFAULT_SCHEMA_ID,
        "version": DEFAULT_SCHEMA_VERSION,
        "synonyms": dict(GLOBAL_SYNONYMS),
        "fields": fields,
    }


@lru_cache(maxsize=1)
def default_schema() -> Schema:
    return load_schema(json.dumps(build_default_document()))
