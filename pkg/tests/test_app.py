import pytest

from backend.app import app


@pytest.fixture
def client():
    app.config["TESTING"] = True
    return app.test_client()


def test_command_listing(client):
    res = client.get("/api/commands")
    assert res.status_code == 200
    body = res.get_json()
    assert body["ok"] is True
    assert "mfcoefs" in [c["name"] for c in body["commands"]]


def test_run_command(client):
    res = client.post("/api/mfcoefs", json={"form": "delta", "n": 4})
    assert res.status_code == 200
    body = res.get_json()
    assert body["text"] == "0,1,-24,252,-1472"
    assert body["result"]["coefficients"] == ["0", "1", "-24", "252", "-1472"]


def test_unknown_command_is_404(client):
    res = client.post("/api/mfnothing", json={})
    assert res.status_code == 404
    assert res.get_json()["ok"] is False


def test_bad_argument_is_400(client):
    res = client.post("/api/mfcoefs", json={"form": "delta", "n": "many"})
    assert res.status_code == 400


def test_body_must_be_an_object(client):
    res = client.post("/api/mfcoefs", json=[1, 2])
    assert res.status_code == 400


def test_computation_error_is_422(client):
    res = client.post("/api/mfinit", json={"level": 4, "weight": 3})
    assert res.status_code == 422
    assert res.get_json()["kind"] == "ParityError"


def test_request_cannot_move_the_cache_directory(client, tmp_path):
    res = client.post("/api/mfdim", json={"level": 11, "weight": 2, "cache_dir": str(tmp_path)})
    assert res.status_code == 400
