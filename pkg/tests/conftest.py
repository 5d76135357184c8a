import pytest

from tests.support import CORPUS


@pytest.fixture
def corpus_path():
    def resolve(name: str) -> str:
        return str(CORPUS / f"{name}.l42mu")
    return resolve


@pytest.fixture(scope="session")
def client():
    from fastapi.testclient import TestClient

    from app.main import app

    with TestClient(app) as test_client:
        yield test_client
