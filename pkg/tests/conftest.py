"""Shared fixtures: the golden corpus and a materialized fixture snapshot."""

from __future__ import annotations

import importlib.util
import shutil
from pathlib import Path

import pytest

from ontosearch.config import AppConfig
from ontosearch.service import Snapshot, run_ingest_cycle

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def _load_corpus():
    spec = importlib.util.spec_from_file_location("corpus", FIXTURE_DIR / "corpus.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


CORPUS = _load_corpus()


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def fixture_cfg(tmp_path_factory) -> AppConfig:
    return AppConfig(
        history_export_path=str(FIXTURE_DIR / "history.ndjson"),
        html_cache_dir=str(FIXTURE_DIR / "html_cache"),
        ontology_path=str(FIXTURE_DIR / "ontology.ttl"),
        state_dir=str(tmp_path_factory.mktemp("state")),
        listen_addr="127.0.0.1:0",
        poll_interval_s=900,
    )


@pytest.fixture(scope="session")
def fixture_snapshot(fixture_cfg) -> Snapshot:
    return run_ingest_cycle(fixture_cfg)


@pytest.fixture
def fixture_tree(tmp_path) -> Path:
    """A writable copy of the fixture inputs for tests that mutate them."""
    root = tmp_path / "fixture"
    root.mkdir()
    for name in ("history.ndjson", "ontology.ttl"):
        shutil.copy(FIXTURE_DIR / name, root / name)
    shutil.copytree(FIXTURE_DIR / "html_cache", root / "html_cache")
    return root


def tree_config(root: Path, **overrides) -> AppConfig:
    kwargs = dict(
        history_export_path=str(root / "history.ndjson"),
        html_cache_dir=str(root / "html_cache"),
        ontology_path=str(root / "ontology.ttl"),
        state_dir=str(root / "state"),
        listen_addr="127.0.0.1:0",
    )
    kwargs.update(overrides)
    return AppConfig(**kwargs)
