import pytest
from fastapi.testclient import TestClient

from api.routes import app, get_store
from storage.result_store import ResultStore

from tests.conftest import CASE_II_VERTICES, SQUARE_CENTRE_POTENTIAL_ALPHA1, SQUARE_ENERGY_ALPHA1, UNIT_SQUARE

RIESZ = {"type": "riesz", "alpha": 1.0}


@pytest.fixture
def client(tmp_path):
    store = ResultStore(str(tmp_path / "results"))
    app.dependency_overrides[get_store] = lambda: store
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    assert "X-Process-Time" in response.headers


def test_energy_of_unit_square(client):
    response = client.post("/energy", json={"polygon": {"vertices": UNIT_SQUARE}, "kernel": RIESZ})
    assert response.status_code == 200
    body = response.json()
    assert body["value"] == pytest.approx(SQUARE_ENERGY_ALPHA1, rel=1e-10)
    assert body["result_hash"] is None


def test_clockwise_polygon_is_reoriented(client):
    response = client.post("/energy", json={"polygon": {"vertices": UNIT_SQUARE[::-1]}, "kernel": RIESZ,
                                            "quad_tol": 1e-6})
    assert response.status_code == 200
    assert response.json()["value"] == pytest.approx(SQUARE_ENERGY_ALPHA1, rel=1e-6)


def test_potential_points(client):
    response = client.post("/potential", json={"polygon": {"vertices": UNIT_SQUARE}, "kernel": RIESZ,
                                               "points": [[0.5, 0.5], [2.0, 2.0]]})
    assert response.status_code == 200
    values = response.json()["values"]
    assert values[0]["x"] == [0.5, 0.5]
    assert values[0]["value"] == pytest.approx(SQUARE_CENTRE_POTENTIAL_ALPHA1, rel=1e-12)
    assert values[1]["value"] < values[0]["value"]


def test_stationarity_report(client):
    response = client.post("/stationarity", json={
        "polygon": {"vertices": [[0, 0], [2, 0], [2, 0.5], [0, 0.5]]},
        "kernel": RIESZ, "constraint": "area", "tolerance": 1e-6,
    })
    assert response.status_code == 200
    verdict = response.json()["verdict"]
    assert not verdict["sliding"]
    assert verdict["tilting"]


def test_variation_comparison(client):
    response = client.post("/variation", json={
        "polygon": {"vertices": CASE_II_VERTICES},
        "kernel": {"type": "regularized_riesz", "alpha": 1.0, "delta": 0.05},
        "flow": {"family": "quad_two_sided", "diagonal": 1},
    })
    assert response.status_code == 200
    body = response.json()
    assert body["flow"]["diagonal"] == 1
    assert body["analytic"]["value"] > 0
    assert body["rel_difference"] < 5e-4


def test_polya_szego(client):
    response = client.post("/polya-szego", json={"shape": "triangle", "a0": 1.0, "steps": 100})
    assert response.status_code == 200
    assert response.json()["values"][-1] == pytest.approx(1.5196713713, abs=1e-9)


def test_archived_result_round_trip(client):
    response = client.post("/energy", json={"polygon": {"vertices": UNIT_SQUARE}, "kernel": RIESZ,
                                            "quad_tol": 1e-6, "archive": True})
    result_hash = response.json()["result_hash"]
    assert result_hash
    stored = client.get(f"/results/{result_hash}")
    assert stored.status_code == 200
    assert stored.json()["metadata"]["kind"] == "energy"
    assert stored.json()["result"]["value"] == pytest.approx(response.json()["value"])


def test_unknown_result_is_404(client):
    assert client.get(f"/results/{'0' * 64}").status_code == 404


def test_library_errors_map_to_400(client):
    response = client.post("/energy", json={"polygon": {"vertices": [[0, 0], [2, 0], [0, 1], [1, 1]]},
                                            "kernel": RIESZ})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "invalid-polygon"
    assert "self-intersects" in body["detail"]


def test_unsupported_flow_maps_to_400(client):
    response = client.post("/variation", json={
        "polygon": {"vertices": [[0, 0], [2, 0], [0, 2], [0.6, 0.6]]}, "kernel": RIESZ,
        "flow": {"family": "diagonal_vertex", "vertex": 4},
    })
    assert response.status_code == 400
    assert response.json()["error"] == "unsupported-input"


@pytest.mark.parametrize("payload", [
    {"polygon": {"vertices": UNIT_SQUARE}, "kernel": {"type": "riesz", "alpha": 2.5}},
    {"polygon": {"vertices": [[0, 0], [1, 0]]}, "kernel": RIESZ},
    {"polygon": {"vertices": UNIT_SQUARE}, "kernel": RIESZ, "quad_tol": 0.5},
    {"polygon": {"vertices": UNIT_SQUARE}, "kernel": {"type": "regularized_riesz", "alpha": 1.0}},
])
def test_invalid_payloads_are_422(client, payload):
    assert client.post("/energy", json=payload).status_code == 422
