# tests/integration/conftest.py
import pytest
from dotenv import load_dotenv


@pytest.fixture(scope="session", autouse=True)
def load_test_env():
    """Load test environment variables."""
    load_dotenv(".env.test", override=True)


@pytest.fixture(autouse=True)
def clear_run_env(monkeypatch):
    for name in ("NTM_OUT_DIR", "NTM_WORKERS"):
        monkeypatch.delenv(name, raising=False)
