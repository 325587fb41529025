from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, Tuple

import pytest
from fastapi import FastAPI

os.environ.setdefault("PDFPROV_LOG_LEVEL", "WARNING")
os.environ.pop("PDFPROV_RULEPACK", None)

from app.core.rules import Rulepack
from app.data.rulepacks import builtin
from app.main import app as fastapi_app
from app.services.corpus import LabeledCorpus, load_corpus
from app.services.fixtures import BUILTIN_PROFILES, generate
from testing_utils import FIXTURE_SEEDS, write_fixture_corpus

from .client import create_client


@pytest.fixture(scope="session")
def app() -> FastAPI:
    return fastapi_app


@pytest.fixture
def client(app: FastAPI):
    test_client = create_client(app)
    try:
        yield test_client
    finally:
        test_client.close()


@pytest.fixture(scope="session")
def builtin_pack() -> Rulepack:
    return builtin()


@pytest.fixture(scope="session")
def fixture_files() -> Dict[Tuple[str, int], bytes]:
    """Generated bytes of every builtin profile for the standard seeds."""

    return {
        (profile.producer, seed): generate(profile, seed)
        for profile in BUILTIN_PROFILES
        for seed in FIXTURE_SEEDS
    }


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    directory = tmp_path_factory.mktemp("fixtures")
    write_fixture_corpus(directory)
    return directory


@pytest.fixture(scope="session")
def corpus(corpus_dir: Path) -> LabeledCorpus:
    return load_corpus(corpus_dir / "manifest.tsv")
