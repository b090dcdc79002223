import base64
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from opcert.service.app import create_app
from opcert.wigner import read_binary


@pytest.fixture()
def client():
    return TestClient(create_app())


def _kernel(A=4.0, C=1.0, poly=None, normalize=True):
    body = {"gaussian": {"A": A, "C": C}, "normalize": normalize}
    if poly:
        body["poly"] = poly
    return body


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_certify_positive(client):
    r = client.post("/certify", json={"kernel": _kernel(4, 1, normalize=False),
                                      "depth": 12})
    assert r.status_code == 200
    body = r.json()
    assert body["verdict"] == "positive_up_to"
    assert body["depth"] == 12
    assert body["witness"] is None
    assert body["text"].startswith("opcert-certificate/1")


def test_certify_negative_witness(client):
    r = client.post("/certify", json={"kernel": _kernel(1, 4, normalize=False),
                                      "depth": 10})
    body = r.json()
    assert body["verdict"] == "non_positive"
    assert body["witness"]["type"] == "negative_ek"
    assert body["witness"]["k"] == 2
    assert body["witness"]["value"] == pytest.approx(-0.5, rel=1e-9)


def test_certify_invalid_config_422(client):
    r = client.post("/certify", json={"kernel": {"gaussian": {"A": -1, "C": 1}}})
    assert r.status_code == 422


def test_engine_failure_500(client, monkeypatch):
    import opcert.service.app as app_mod
    from opcert.certify import EngineDisagreement

    def boom(*a, **kw):
        raise EngineDisagreement("synthetic", {"k": 1})

    monkeypatch.setattr(app_mod, "certify", boom)
    local = TestClient(create_app(), raise_server_exceptions=False)
    r = local.post("/certify", json={"kernel": _kernel()})
    assert r.status_code == 500
    assert r.json()["detail"]["error"] == "EngineDisagreement"


def test_spectrum(client):
    r = client.post("/spectrum", json={"kernel": _kernel(4, 1), "n": 5})
    body = r.json()
    assert body["eps0"] == pytest.approx(2 / 3)
    assert body["eps"] == pytest.approx(1 / 3)
    assert body["eigenvalues"][0] == pytest.approx(2 / 3)
    assert len(body["eigenvalues"]) == 5
    assert body["csv"].splitlines()[1] == "n,lambda"


def test_sweep(client):
    req = {"kernel": _kernel(1.5, 1.0, poly={"alpha2": -1.0, "gamma0": 1.0}),
           "param": "gamma2", "lo": 0.5, "hi": 1.5, "count": 3, "depth": 6}
    r = client.post("/sweep", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["csv"].startswith("# opcert-sweep/1")
    assert len(body["csv"].splitlines()) == 2 + 3
    assert "H_6" in body["summary"]
    assert body["h_intervals"]["6"]  # JSON object keys are strings


def test_sweep_bad_param_422(client):
    req = {"kernel": _kernel(), "param": "bogus", "lo": 0.0, "hi": 1.0, "count": 3}
    assert client.post("/sweep", json=req).status_code == 422


def test_wigner_csv(client):
    r = client.post("/wigner", json={"kernel": _kernel(1.5, 1.0,
                                                       poly={"alpha2": -1.0, "gamma2": 1.0,
                                                             "gamma0": 1.0}),
                                     "n_x": 32, "n_p": 64})
    body = r.json()
    assert body["integral"] == pytest.approx(1.0, abs=1e-6)
    assert body["csv"].startswith("# opcert-wigner/1")
    assert body["data_b64"] is None


def test_wigner_binary(client):
    r = client.post("/wigner", json={"kernel": _kernel(), "n_x": 16, "n_p": 32,
                                     "format": "binary"})
    raw = base64.b64decode(r.json()["data_b64"])
    grid = read_binary(io.BytesIO(raw))
    assert grid.values.shape == (16, 32)
    assert np.isfinite(grid.values).all()


def test_wigner_window_too_small_422(client):
    r = client.post("/wigner", json={"kernel": _kernel(), "n_x": 16, "n_p": 32,
                                     "window": 0.5})
    assert r.status_code == 422
    assert "suggested_window" in r.json()["detail"]
