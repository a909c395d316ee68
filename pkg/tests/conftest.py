from __future__ import annotations

import pytest

from futamix.ddsl import load_fixture
from futamix import projections as prj


@pytest.fixture(scope="session")
def fixtures():
    return {n: load_fixture(n) for n in ("coffee", "empty", "branchy")}


@pytest.fixture(scope="session")
def shared():
    """Dialog-independent projection artifacts (compilers, cogen), built once."""
    return prj.shared_programs()


@pytest.fixture(scope="session")
def artifacts(fixtures, shared):
    """Per-fixture projection artifacts."""
    return {name: prj.build_artifacts(spec) for name, spec in fixtures.items()}
