from __future__ import annotations

from pathlib import Path

import pytest

from groupscope.annotate.cache import AnnotationCache
from groupscope.annotate.mock import MockChatBackend
from groupscope.annotate.tasks import TaskRunner
from groupscope.corpus import default_scheme, load_session

FIXTURES = Path(__file__).parent / "fixtures"
COHORT_DIR = FIXTURES / "cohort"


@pytest.fixture(scope="session")
def cohort_dir() -> Path:
    return COHORT_DIR


@pytest.fixture(scope="session")
def g10_session():
    return load_session(COHORT_DIR / "G10")


@pytest.fixture(scope="session")
def g18_session():
    return load_session(COHORT_DIR / "G18")


@pytest.fixture()
def scheme():
    return default_scheme()


@pytest.fixture()
def mock_runner(tmp_path):
    backend = MockChatBackend(seed=0)
    cache = AnnotationCache(tmp_path / "cache")
    return TaskRunner(backend=backend, cache=cache, temperature=0.7, seed=0)


@pytest.fixture()
def uncached_runner():
    return TaskRunner(backend=MockChatBackend(seed=0), cache=None, temperature=0.7, seed=0)
