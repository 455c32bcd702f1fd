from __future__ import annotations

import json
from pathlib import Path

import pytest

from sonostruct.corpus import generate_corpus
from sonostruct.defaults import default_schema


@pytest.fixture(scope="session")
def schema():
    return default_schema()


@pytest.fixture(scope="session")
def txt_corpus(tmp_path_factory) -> tuple[Path, dict]:
    """A small deterministic text corpus shared by unit tests."""
    out = tmp_path_factory.mktemp("corpus_txt")
    sidecar = generate_corpus(out, count=30, seed=11, fmt="txt")
    return out, json.loads(sidecar.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def pdf_corpus(tmp_path_factory) -> tuple[Path, dict]:
    """The 100-report PDF corpus the acceptance suite runs against."""
    out = tmp_path_factory.mktemp("corpus_pdf")
    sidecar = generate_corpus(out, count=100, seed=7, fmt="pdf")
    return out, json.loads(sidecar.read_text(encoding="utf-8"))
