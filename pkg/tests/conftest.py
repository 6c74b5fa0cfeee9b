from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def tiny6_dir() -> Path:
    return FIXTURES / "tiny6"
