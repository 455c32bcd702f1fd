"""Synthetic report corpus with a ground-truth sidecar.

Generates seeded, reproducible ultrasound report files (PDF or plain
text) whose wording is drawn from the phrasings the default schema's
rules cover, together with a sidecar recording the intended value of
every stated field. The sidecar is computed from the chosen ground truth
directly, never by running the extractor, so it can serve as an
independent oracle.

Reports are internally coherent: a report concluding no endometriosis
carries no positive disease findings, and bowel involvement only appears
alongside a definite deep-infiltrating conclusion (whose wording the
bowel sentences embed).
"""

from __future__ import annotations

import json
import random
import textwrap
from dataclasses import dataclass, field
from pathlib import Path

from .defaults import DEFAULT_SCHEMA_ID

SIDECAR_NAME = "ground_truth.json"

_FILLER_FINDINGS = (
    "The patient tolerated the examination well.",
    "Bowel gas limited views of the deep pelvis.",
    "Images were archived for comparison.",
    "The bladder filling was adequate.",
    "Both kidneys appeared grossly unremarkable.",
    "No adnexal mass was identified elsewhere.",
)

_FILLER_IMPRESSION = (
    "Findings as described above.",
    "Correlation with clinical findings is recommended.",
    "Multidisciplinary review is suggested.",
)

_INDICATIONS = (
    "chronic pelvic pain",
    "dysmenorrhoea and dyspareunia",
    "secondary infertility",
    "suspected pelvic pathology",
)


@dataclass
class GeneratedReport:
    text: str
    expected: dict[str, dict] = field(default_factory=dict)


class _Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.expected: dict[str, dict] = {}
        self.findings: list[str] = []
        self.survey: list[str] = []
        self.impression: list[str] = []

    def put(self, field_id: str, value: float | str) -> None:
        self.expected[field_id] = {"status": "present", "value": value}

    def put_ambiguous(self, field_id: str) -> None:
        self.expected[field_id] = {"status": "ambiguous", "value": None}


def _uterus_block(b: _Builder) -> None:
    rng = b.rng
    if rng.random() < 0.3:
        l, w, a = rng.randint(6, 9), rng.randint(4, 6), rng.randint(3, 5)
        b.findings.append(f"The uterus measures {l} x {w} x {a} cm in size.")
        values = (l * 10.0, w * 10.0, a * 10.0)
    else:
        l, w, a = rng.randint(60, 95), rng.randint(35, 60), rng.randint(30, 55)
        verb = rng.choice(("measures", "is"))
        b.findings.append(f"The uterus {verb} {l} x {w} x {a} mm.")
        values = (float(l), float(w), float(a))
    for fid, value in zip(("uterus_length_mm", "uterus_width_mm", "uterus_ap_mm"), values):
        b.put(fid, value)

    if rng.random() < 0.7:
        vol = rng.randint(40, 140)
        b.findings.append(f"Uterine volume is {vol} ml.")
        b.put("uterus_volume_ml", float(vol))
    if rng.random() < 0.8:
        t = round(rng.uniform(3.0, 14.0), 1)
        b.findings.append(
            rng.choice(
                (
                    f"Endometrial thickness is {t} mm.",
                    f"The endometrium measures {t} mm.",
                )
            )
        )
        b.put("endometrial_thickness_mm", t)
    if rng.random() < 0.6:
        c = rng.randint(25, 40)
        b.findings.append(f"The cervix measures {c} mm in length.")
        b.put("cervix_length_mm", float(c))
    if rng.random() < 0.5:
        j = rng.randint(4, 12)
        b.findings.append(
            rng.choice(
                (
                    f"The junctional zone measures {j} mm.",
                    f"Junctional zone thickness is {j} mm.",
                )
            )
        )
        b.put("junctional_zone_thickness_mm", float(j))

    roll = rng.random()
    if roll < 0.3:
        b.findings.append("Features of adenomyosis are noted.")
        b.put("adenomyosis_present", "yes")
    elif roll < 0.55:
        b.findings.append("No adenomyosis is demonstrated.")
        b.put("adenomyosis_present", "no")
    elif roll < 0.65:
        b.findings.append("Suspicious for adenomyosis.")
        b.put_ambiguous("adenomyosis_present")


def _ovary_block(b: _Builder, allow_positive: bool) -> None:
    rng = b.rng
    for side in ("right", "left"):
        title = side.capitalize()
        if rng.random() < 0.9:
            l = rng.randint(25, 45)
            w = rng.randint(15, 30)
            a = rng.randint(12, 25)
            b.findings.append(f"The {side} ovary measures {l} x {w} x {a} mm.")
            for fid, value in zip(
                (f"{side}_ovary_length_mm", f"{side}_ovary_width_mm", f"{side}_ovary_ap_mm"),
                (float(l), float(w), float(a)),
            ):
                b.put(fid, value)
        if rng.random() < 0.7:
            vol = round(rng.uniform(3.0, 15.0), 1)
            b.findings.append(f"{title} ovarian volume is {vol} ml.")
            b.put(f"{side}_ovary_volume_ml", vol)
        if rng.random() < 0.55:
            state = rng.choices(("normal", "fixed", "reduced"), weights=(2, 1, 1))[0]
            if state == "normal":
                b.findings.append(f"The {side} ovary is freely mobile.")
            elif state == "fixed":
                b.findings.append(f"The {side} ovary is fixed.")
            else:
                b.findings.append(f"The {side} ovary shows reduced mobility.")
            b.put(f"{side}_ovary_mobility", state)

        roll = rng.random()
        if roll < 0.3 and allow_positive:
            size = rng.randint(15, 60)
            b.findings.append(f"A {size} mm endometrioma is seen in the {side} ovary.")
            b.put(f"{side}_endometrioma_present", "yes")
            b.put(f"{side}_endometrioma_max_mm", float(size))
            if rng.random() < 0.4:
                ev = round(rng.uniform(4.0, 40.0), 1)
                b.findings.append(f"{title} endometrioma volume is {ev} ml.")
                b.put(f"{side}_endometrioma_volume_ml", ev)
        elif roll < 0.55:
            b.findings.append(f"No endometrioma is seen in the {side} ovary.")
            b.put(f"{side}_endometrioma_present", "no")
        elif roll < 0.68 and allow_positive:
            b.findings.append(
                rng.choice(
                    (
                        f"Possible endometrioma in the {side} ovary.",
                        f"Cannot exclude an endometrioma in the {side} ovary.",
                    )
                )
            )
            b.put_ambiguous(f"{side}_endometrioma_present")

    roll = rng.random()
    if roll < 0.18 and allow_positive:
        b.findings.append("Kissing ovaries are noted.")
        b.put("kissing_ovaries", "yes")
    elif roll < 0.45:
        b.findings.append("The ovaries are separate.")
        b.put("kissing_ovaries", "no")
    elif roll < 0.5 and allow_positive:
        b.findings.append("Possible kissing ovaries.")
        b.put_ambiguous("kissing_ovaries")

    if rng.random() < 0.7:
        if rng.random() < 0.5:
            b.findings.append(
                rng.choice(
                    ("The sliding sign is positive.", "The sliding sign is preserved.")
                )
            )
            b.put("uterine_sliding_sign", "positive")
        else:
            b.findings.append(
                rng.choice(
                    ("The sliding sign is negative.", "The sliding sign is absent.")
                )
            )
            b.put("uterine_sliding_sign", "negative")

    roll = rng.random()
    if roll < 0.35:
        b.findings.append("A small amount of free fluid is seen in the pouch of Douglas.")
        b.put("pod_free_fluid_present", "yes")
        if rng.random() < 0.5:
            fv = rng.randint(2, 15)
            b.findings.append(f"Free fluid volume is {fv} ml.")
            b.put("pod_free_fluid_volume_ml", float(fv))
    elif roll < 0.6:
        b.findings.append("No free fluid is seen in the pouch of Douglas.")
        b.put("pod_free_fluid_present", "no")


def _survey_block(b: _Builder, type_state: str) -> None:
    rng = b.rng
    allow_positive = type_state != "none"

    if type_state == "none":
        b.survey.append("There is no sonographic evidence of endometriosis.")
        b.put("endometriosis_type", "none")
    elif type_state == "superficial":
        b.survey.append("Findings are consistent with superficial endometriosis.")
        b.put("endometriosis_type", "superficial")
    elif type_state == "ovarian":
        b.survey.append("Findings are consistent with ovarian endometriosis.")
        b.put("endometriosis_type", "ovarian")
    elif type_state == "deep":
        b.survey.append("Findings are consistent with deep infiltrating endometriosis.")
        b.put("endometriosis_type", "deep_infiltrating")
    elif type_state == "hedged":
        b.survey.append("Possible deep infiltrating endometriosis.")
        b.put_ambiguous("endometriosis_type")

    for side in ("right", "left"):
        roll = rng.random()
        if roll < 0.3 and allow_positive:
            b.survey.append(
                rng.choice(
                    (
                        f"There is nodularity along the {side} uterosacral ligament.",
                        f"A {rng.randint(6, 15)} mm nodule is seen on the {side} uterosacral ligament.",
                    )
                )
            )
            b.put(f"{side}_usl_nodules", "yes")
        elif roll < 0.6:
            b.survey.append(
                rng.choice(
                    (
                        f"The {side} uterosacral ligament is smooth.",
                        f"No nodules are seen on the {side} uterosacral ligament.",
                    )
                )
            )
            b.put(f"{side}_usl_nodules", "no")
        elif roll < 0.75 and allow_positive:
            b.survey.append(
                rng.choice(
                    (
                        f"Possible nodule on the {side} uterosacral ligament.",
                        f"Cannot exclude a nodule on the {side} uterosacral ligament.",
                    )
                )
            )
            b.put_ambiguous(f"{side}_usl_nodules")

    roll = rng.random()
    if roll < 0.3 and allow_positive:
        b.survey.append(
            rng.choice(
                (
                    "The pouch of Douglas is obliterated.",
                    "There is complete obliteration of the pouch of Douglas.",
                    "POD obliteration is noted.",
                )
            )
        )
        b.put("pod_obliteration", "yes")
    elif roll < 0.65:
        b.survey.append(
            rng.choice(
                ("The pouch of Douglas is clear.", "No POD obliteration is seen.")
            )
        )
        b.put("pod_obliteration", "no")
    elif roll < 0.75 and allow_positive:
        b.survey.append("Possible obliteration of the pouch of Douglas.")
        b.put_ambiguous("pod_obliteration")

    # Bowel wording embeds the deep-infiltrating phrase, so positive or
    # hedged bowel statements only appear with a definite deep conclusion.
    roll = rng.random()
    if type_state == "deep":
        if roll < 0.4:
            b.survey.append(
                rng.choice(
                    (
                        "Bowel deep infiltrating endometriosis is present.",
                        "Deep infiltrating endometriosis involves the rectosigmoid bowel.",
                    )
                )
            )
            b.put("bowel_die", "yes")
        elif roll < 0.55:
            b.survey.append("Possible bowel deep infiltrating endometriosis.")
            b.put_ambiguous("bowel_die")
        elif roll < 0.75:
            b.survey.append("The bowel is free of deep endometriosis.")
            b.put("bowel_die", "no")
    elif roll < 0.35:
        b.survey.append("The bowel is free of deep endometriosis.")
        b.put("bowel_die", "no")

    for site, phrase in (
        ("bladder", "bladder wall"),
        ("rectovaginal_septum", "rectovaginal septum"),
        ("sigmoid_colon", "sigmoid colon"),
    ):
        roll = rng.random()
        if roll < 0.25 and allow_positive:
            l = rng.randint(8, 30)
            w = rng.randint(5, 20)
            d = rng.randint(4, 15)
            b.survey.append(
                f"A {l} x {w} x {d} mm nodule is seen on the {phrase}."
            )
            b.put(f"{site}_nodule_present", "yes")
            b.put(f"{site}_nodule_length_mm", float(l))
            b.put(f"{site}_nodule_width_mm", float(w))
            b.put(f"{site}_nodule_depth_mm", float(d))
        elif roll < 0.5:
            b.survey.append(f"No nodule is seen on the {phrase}.")
            b.put(f"{site}_nodule_present", "no")
        elif roll < 0.65 and allow_positive:
            b.survey.append(f"Possible nodule at the {phrase}.")
            b.put_ambiguous(f"{site}_nodule_present")

    for fid, phrase in (
        ("uterine_tenderness", "uterus"),
        ("right_adnexal_tenderness", "right adnexa"),
        ("left_adnexal_tenderness", "left adnexa"),
    ):
        roll = rng.random()
        if roll < 0.3:
            b.survey.append(f"There is site-specific tenderness over the {phrase}.")
            b.put(fid, "yes")
        elif roll < 0.6:
            b.survey.append(f"No tenderness over the {phrase}.")
            b.put(fid, "no")


def generate_report(rng: random.Random, reference: str = "SYN-0000") -> GeneratedReport:
    b = _Builder(rng)

    roll = rng.random()
    if roll < 0.15:
        type_state = "none"
    elif roll < 0.3:
        type_state = "superficial"
    elif roll < 0.45:
        type_state = "ovarian"
    elif roll < 0.75:
        type_state = "deep"
    elif roll < 0.85:
        type_state = "hedged"
    else:
        type_state = "missing"

    _uterus_block(b)
    _ovary_block(b, allow_positive=type_state != "none")
    _survey_block(b, type_state)

    for filler in rng.sample(_FILLER_FINDINGS, k=rng.randint(1, 3)):
        b.findings.insert(rng.randint(0, len(b.findings)), filler)

    if type_state == "none":
        b.impression.append("Normal pelvic ultrasound appearances.")
    b.impression.append(rng.choice(_FILLER_IMPRESSION))

    header = [
        "TRANSVAGINAL ULTRASOUND REPORT",
        f"Study reference: {reference}.",
        f"Indication: {rng.choice(_INDICATIONS)}.",
        "Technique: transvaginal and transabdominal scanning.",
    ]
    paragraphs = [
        "\n".join(header),
        "FINDINGS",
        textwrap.fill(" ".join(b.findings), width=92),
        textwrap.fill(" ".join(b.survey), width=92),
        "IMPRESSION",
        textwrap.fill(" ".join(b.impression), width=92),
    ]
    return GeneratedReport(text="\n\n".join(paragraphs), expected=b.expected)


def _write_pdf(path: Path, text: str) -> None:
    from reportlab.lib.pagesizes import A4
    from reportlab.pdfgen import canvas

    page = canvas.Canvas(str(path), pagesize=A4)
    _, height = A4
    lines_per_page = 64

    def new_text_object():
        obj = page.beginText(40, height - 50)
        obj.setFont("Helvetica", 10)
        return obj

    text_obj = new_text_object()
    count = 0
    for line in text.split("\n"):
        if count >= lines_per_page:
            page.drawText(text_obj)
            page.showPage()
            text_obj = new_text_object()
            count = 0
        text_obj.textLine(line)
        count += 1
    page.drawText(text_obj)
    page.showPage()
    page.save()


def generate_corpus(
    out_dir: Path | str,
    count: int = 100,
    seed: int = 7,
    fmt: str = "pdf",
) -> Path:
    """Write count report files plus the ground-truth sidecar.

    Returns the sidecar path. fmt is "pdf" or "txt"; PDF output needs
    the reportlab package.
    """
    if fmt not in ("pdf", "txt"):
        raise ValueError(f"unsupported corpus format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    files: dict[str, dict] = {}
    for index in range(1, count + 1):
        reference = f"SYN-{seed:03d}-{index:04d}"
        report = generate_report(rng, reference=reference)
        filename = f"report_{index:04d}.{fmt}"
        path = out / filename
        if fmt == "pdf":
            _write_pdf(path, report.text)
        else:
            path.write_text(report.text + "\n", encoding="utf-8")
        files[filename] = {"reference": reference, "fields": report.expected}
    sidecar = out / SIDECAR_NAME
    sidecar.write_text(
        json.dumps(
            {
                "schema_id": DEFAULT_SCHEMA_ID,
                "seed": seed,
                "count": count,
                "format": fmt,
                "files": files,
            },
            indent=2,
            ensure_ascii=False,
        ),
        encoding="utf-8",
    )
    return sidecar
