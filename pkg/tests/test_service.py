import httpx
import pytest

from smartdca.errors import ConfigError, DomainError
from smartdca.service.app import create_app
from smartdca.service.client import ServiceClient, _InProcessTransport

GAS_SERIES = {"axis": "date", "timestamps": ["2020-01-01", "2020-02-01"], "prices": [0.5, 1.5]}


@pytest.fixture(scope="module")
def client():
    with ServiceClient() as c:
        yield c


class TestHealth:
    def test_health(self, client):
        body = client.get("/health")
        assert body["status"] == "ok"


class TestBacktestEndpoint:
    def test_gas_example(self, client):
        resp = client.post(
            "/backtest",
            {
                "series": GAS_SERIES,
                "strategies": [{"variant": "RI"}, {"variant": "DCA"}, {"variant": "RHO", "rho": 1}],
            },
        )
        mus = [row["mu"] for row in resp["comparison"]]
        assert mus == pytest.approx([1.0, 0.75, 0.6], rel=1e-11)
        assert all(r["status"] == "ok" for r in resp["reports"])
        assert resp["reports"][2]["strategy"]["label"] == "RHO(rho=1)"

    def test_windows_embedded(self, client):
        ts = [f"2020-{m:02d}-01" for m in range(1, 13)] + [f"2021-{m:02d}-01" for m in range(1, 13)]
        prices = list(range(1, 25))
        resp = client.post(
            "/backtest",
            {
                "series": {"axis": "date", "timestamps": ts, "prices": prices},
                "strategies": [{"variant": "DCA"}],
                "windows": {"length": "1y", "step": "1y"},
            },
        )
        wins = resp["reports"][0]["windows"]
        assert len(wins) == 2
        assert wins[0]["window_start"] == "2020-01-01"

    def test_partial_failure_flagged(self, client):
        resp = client.post(
            "/backtest",
            {
                "series": {"axis": "tick", "timestamps": [1, 2], "prices": [1.0, 1e-6]},
                "strategies": [{"variant": "DCA"}, {"variant": "RHO", "rho": 3}],
            },
        )
        statuses = [r["status"] for r in resp["comparison"]]
        assert statuses == ["ok", "error"]
        assert resp["reports"][1]["status"] == "error"

    def test_modulated_strategy_parses(self, client):
        resp = client.post(
            "/compare",
            {
                "series": GAS_SERIES,
                "strategies": [
                    {"variant": "F_RHO_OUT", "rho": 1, "modulator": "tanh"},
                    {"variant": "F_RHO_OUT", "rho": 1,
                     "modulator": {"name": "sig+", "x0": 0.5, "lambda": 0.1}},
                ],
            },
        )
        assert [r["modulator"] for r in resp["comparison"]] == ["tanh", "sig+"]

    def test_empty_strategies_is_config_error(self, client):
        with pytest.raises(ConfigError):
            client.post("/backtest", {"series": GAS_SERIES, "strategies": []})

    def test_invalid_series_is_domain_error(self, client):
        with pytest.raises(DomainError):
            client.post(
                "/backtest",
                {
                    "series": {"axis": "tick", "timestamps": [1, 2], "prices": [1.0, -2.0]},
                    "strategies": [{"variant": "DCA"}],
                },
            )


class TestSimulateEndpoint:
    def test_deterministic_per_seed(self, client):
        payload = {"n": 50, "seed": 77, "rho_grid": [0.0, 1.0]}
        a = client.post("/simulate", payload)
        b = client.post("/simulate", payload)
        assert a == b
        c = client.post("/simulate", {**payload, "seed": 78})
        assert a != c

    def test_dca_baseline_and_bounds(self, client):
        resp = client.post("/simulate", {"n": 100, "seed": 5})
        points = resp["points"]
        dca = next(p for p in points if p["variant"] == "DCA")
        assert dca["max_single_investment"] == 1.0
        for p in points:
            if p["variant"] in ("F_RHO_IN", "F_RHO_OUT") and p["status"] == "ok":
                assert p["max_single_investment"] <= 1.0 + 1e-12
                assert p["mu"] <= dca["mu"] * (1 + 1e-12)

    def test_cash_rows_cover_every_event(self, client):
        resp = client.post("/simulate", {"n": 20, "seed": 5, "rho_grid": [1.0], "modulators": ["tanh"]})
        combos = {(c["variant"], c["rho"]) for c in resp["cash"]}
        # DCA + RHO + in/out tanh
        assert len(combos) == 4
        assert sum(1 for c in resp["cash"] if c["variant"] == "DCA") == 20


class TestVerifyEndpoint:
    def test_quick_suite_passes(self, client):
        resp = client.post(
            "/verify", {"seed": 3, "cs_vectors": 200, "chain_series": 10, "fd_vectors": 3}
        )
        assert resp["all_hold"] is True
        assert resp["rng"] == "numpy-pcg64"

    def test_fault_injection_fails(self, client):
        resp = client.post(
            "/verify",
            {"seed": 3, "cs_vectors": 50, "chain_series": 3, "fd_vectors": 2, "inject_fault": True},
        )
        assert resp["all_hold"] is False


class TestCalibrateEndpoint:
    def test_yearly_windows(self, client):
        ts = ["2020-02-01", "2020-06-01", "2021-03-01", "2021-04-01"]
        resp = client.post(
            "/calibrate",
            {"series": {"axis": "date", "timestamps": ts, "prices": [1.0, 2.0, 2.0, 4.0]}},
        )
        assert [w["window"] for w in resp["windows"]] == ["2020", "2021"]
        first = resp["windows"][0]
        assert first["x0"] == 0.75 and first["lambda"] == 0.0625

    def test_explicit_window(self, client):
        ts = ["2020-01-01", "2020-06-01", "2021-01-01"]
        resp = client.post(
            "/calibrate",
            {
                "series": {"axis": "date", "timestamps": ts, "prices": [1.0, 2.0, 4.0]},
                "start": "2020-01-01",
                "end": "2021-01-01",
            },
        )
        assert len(resp["windows"]) == 1
        assert resp["windows"][0]["n_prices"] == 2

    def test_constant_window_flags_floor(self, client):
        resp = client.post(
            "/calibrate",
            {"series": {"axis": "tick", "timestamps": [1, 2], "prices": [2.0, 2.0]}},
        )
        assert resp["windows"][0]["floored"] is True

    def test_empty_explicit_window_names_window(self, client):
        ts = ["2020-01-01", "2020-06-01"]
        with pytest.raises(DomainError, match="2023"):
            client.post(
                "/calibrate",
                {
                    "series": {"axis": "date", "timestamps": ts, "prices": [1.0, 2.0]},
                    "start": "2023-01-01",
                    "end": "2024-01-01",
                },
            )


class TestHttpContract:
    def test_error_body_names_exception(self):
        http = httpx.Client(transport=_InProcessTransport(create_app()), base_url="http://t")
        resp = http.post(
            "/backtest",
            json={"series": {"axis": "tick", "timestamps": [1], "prices": [-1.0]},
                  "strategies": [{"variant": "DCA"}]},
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "DomainError"

    def test_validation_error_is_422(self):
        http = httpx.Client(transport=_InProcessTransport(create_app()), base_url="http://t")
        resp = http.post("/backtest", json={"strategies": "nope"})
        assert resp.status_code == 422
