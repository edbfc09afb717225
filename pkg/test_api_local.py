import json

import pytest
from fastapi.testclient import TestClient

import main
import states


@pytest.fixture
def client():
    return TestClient(main.app)


@pytest.fixture
def w3_body(w3):
    return {"state": json.loads(states.dumps_state(w3))}


@pytest.fixture
def example2_body(example2):
    return {"state": json.loads(states.dumps_state(example2))}


def test_root(client):
    data = client.get("/").json()
    assert "/api/measure" in data["endpoints"]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_measure(client, w3_body):
    response = client.post("/api/measure", json={**w3_body, "kind": "concurrence"})
    assert response.status_code == 200
    data = response.json()
    assert data["global"] == pytest.approx(2 * 2 ** 0.5 / 3, abs=1e-10)
    assert data["pairs"] == pytest.approx([2 / 3, 2 / 3], abs=1e-10)


def test_measure_wrong_amplitude_count(client):
    body = {"state": {"kind": "pure", "n_qubits": 2, "amplitudes": [[1, 0]]}}
    response = client.post("/api/measure", json=body)
    assert response.status_code == 400
    assert "amplitudes" in response.json()["error"]


def test_measure_bad_partition(client, w3_body):
    response = client.post("/api/measure", json={**w3_body, "focus": 0, "partners": [1]})
    assert response.status_code == 400


def test_measure_missing_state(client):
    assert client.post("/api/measure", json={"kind": "eof"}).status_code == 422


def test_threshold(client, example2_body):
    response = client.post("/api/threshold", json={**example2_body, "which": "alpha0"})
    assert response.status_code == 200
    assert response.json()["threshold"] == pytest.approx(0.783586, abs=1e-5)


def test_threshold_alpha1_eof(client, w3_body):
    response = client.post("/api/threshold", json={**w3_body, "kind": "eof", "which": "alpha1"})
    assert response.status_code == 200
    data = response.json()
    assert data["threshold"] == pytest.approx(1.35244, abs=1e-4)
    assert data["sign_changes"] == 1


def test_threshold_product_state(client):
    body = {"state": json.loads(states.dumps_state(states.product_state([0, 0, 0])))}
    response = client.post("/api/threshold", json=body)
    assert response.status_code == 400


def test_example(client):
    response = client.get("/api/example/2")
    assert response.status_code == 200
    assert response.json()["passed"] is True


def test_unknown_example(client):
    assert client.get("/api/example/9").status_code == 400


@pytest.mark.parametrize("grid, relation", [
    ("0:1.7:0.05", "polygamy_le"),
    ("2:4:0.5", "monogamy_ge"),
])
def test_verify_region(client, w3_body, grid, relation):
    response = client.post("/api/verify-region", json={**w3_body, "grid": grid, "relation": relation})
    assert response.status_code == 200
    data = response.json()
    assert data["passed"] is True
    assert data["failures"] == 0


def test_verify_region_above_alpha0_fails(client, w3_body):
    response = client.post("/api/verify-region",
                           json={**w3_body, "grid": "1.8:2.4:0.2", "relation": "polygamy_le"})
    assert response.status_code == 200
    assert response.json()["passed"] is False


def test_verify_region_bad_grid(client, w3_body):
    response = client.post("/api/verify-region", json={**w3_body, "grid": "0:2"})
    assert response.status_code == 400
