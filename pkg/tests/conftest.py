from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def embedded_snippet() -> str:
    return (FIXTURES / "embedded_snippet.cc").read_text(encoding="utf-8")
