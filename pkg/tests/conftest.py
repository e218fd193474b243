from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def fixture_pack() -> Path:
    root = REPO_ROOT / "fixtures"
    if not root.exists():
        pytest.skip("fixture pack missing; run scripts/make_fixtures.py")
    return root
