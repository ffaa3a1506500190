"""The JSON contract the browser console relies on, pinned by a fixture
file shared with the frontend test suite (frontend/fixtures/api_fixtures.json)."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from ortholearn import synthetic
from ortholearn.config import PipelineConfig
from ortholearn.service import create_app

FIXTURE_PATH = Path(__file__).parent.parent / "frontend" / "fixtures" / "api_fixtures.json"

pytestmark = pytest.mark.skipif(not FIXTURE_PATH.exists(),
                                reason="shared fixture file missing")


def assert_same_shape(actual, fixture, path="$"):
    """Key sets and primitive types must match; None acts as a wildcard."""
    if fixture is None or actual is None:
        return
    if isinstance(fixture, dict):
        assert isinstance(actual, dict), path
        assert sorted(actual) == sorted(fixture), \
            f"{path}: {sorted(actual)} != {sorted(fixture)}"
        for key in fixture:
            assert_same_shape(actual[key], fixture[key], f"{path}.{key}")
    elif isinstance(fixture, list):
        assert isinstance(actual, list), path
        if fixture and actual:
            assert_same_shape(actual[0], fixture[0], f"{path}[0]")
    elif isinstance(fixture, bool):
        assert isinstance(actual, bool), path
    elif isinstance(fixture, (int, float)):
        assert isinstance(actual, (int, float)) and not isinstance(actual, bool), path
    else:
        assert isinstance(actual, type(fixture)), path


@pytest.fixture(scope="module")
def fixtures():
    return json.loads(FIXTURE_PATH.read_text())


@pytest.fixture(scope="module")
def scripted_responses(tmp_path_factory):
    root = tmp_path_factory.mktemp("contract_ds")
    synthetic.write_synthetic_dataset(root, views_per_category=3, seed=6,
                                      categories=["brick", "can"])
    app = create_app(PipelineConfig(resolution=64), default_dataset=str(root))
    responses = {}
    with TestClient(app) as client:
        responses["create_session"] = client.post("/sessions", json={}).json()
        sid = responses["create_session"]["id"]
        responses["next"] = client.post(f"/sessions/{sid}/next").json()
        responses["teach"] = client.post(f"/sessions/{sid}/teach",
                                         json={"label": "brick"}).json()
        responses["next_after_teach"] = client.post(f"/sessions/{sid}/next").json()
        responses["correct"] = client.post(f"/sessions/{sid}/correct",
                                           json={"label": "can"}).json()
        responses["state"] = client.get(f"/sessions/{sid}").json()
        responses["categories"] = client.get(f"/sessions/{sid}/categories").json()
        responses["log"] = client.get(f"/sessions/{sid}/log").json()
        responses["error_unknown_session"] = client.get("/sessions/nope").json()
        while True:
            r = client.post(f"/sessions/{sid}/next")
            if r.status_code == 409:
                responses["error_end_of_data"] = r.json()
                break
    return responses


@pytest.mark.parametrize("key", [
    "create_session", "next", "teach", "next_after_teach", "correct",
    "state", "categories", "log", "error_unknown_session", "error_end_of_data",
])
def test_live_service_matches_shared_fixture(fixtures, scripted_responses, key):
    assert_same_shape(scripted_responses[key], fixtures[key], path=key)
