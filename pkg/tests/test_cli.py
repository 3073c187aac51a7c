import csv
import json
from pathlib import Path

import yaml

from smartdca import cli
from smartdca.marketdata import bundled_data_path

GAS_CSV = "date,price\n2020-01-01,0.5\n2020-02-01,1.5\n"


def write_config(tmp_path: Path, cfg: dict, name="config.yaml") -> str:
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return str(path)


def gas_config(tmp_path: Path, **extra) -> str:
    csv_path = tmp_path / "gas.csv"
    csv_path.write_text(GAS_CSV, encoding="utf-8")
    cfg = {
        "seed": 7,
        "data": {"csv": str(csv_path)},
        "strategies": [{"variant": "DCA"}, {"variant": "RHO", "rho": 1}],
        "output": {"dir": str(tmp_path / "out")},
    }
    cfg.update(extra)
    return write_config(tmp_path, cfg)


def read_comparison(out_dir: Path) -> list:
    with (out_dir / "comparison.csv").open() as fh:
        return list(csv.DictReader(fh))


class TestUsageErrors:
    def test_unknown_subcommand_exits_1(self):
        assert cli.main(["explode"]) == cli.EXIT_CONFIG

    def test_no_subcommand_exits_1(self):
        assert cli.main([]) == cli.EXIT_CONFIG

    def test_missing_config_file_exits_1(self, capsys):
        assert cli.main(["backtest", "--config", "/nope/missing.yaml"]) == cli.EXIT_CONFIG
        assert "config" in capsys.readouterr().err

    def test_empty_strategy_list_exits_1(self, tmp_path):
        cfg = gas_config(tmp_path)
        loaded = yaml.safe_load(Path(cfg).read_text())
        loaded["strategies"] = []
        cfg2 = write_config(tmp_path, loaded, "empty.yaml")
        assert cli.main(["backtest", "--config", cfg2]) == cli.EXIT_CONFIG

    def test_missing_data_section_exits_1(self, tmp_path):
        cfg = write_config(tmp_path, {"strategies": [{"variant": "DCA"}]})
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_CONFIG


class TestDataErrors:
    def test_missing_csv_exits_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"data": {"csv": str(tmp_path / "none.csv")}, "strategies": [{"variant": "DCA"}]},
        )
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_DATA
        assert "data error" in capsys.readouterr().err

    def test_invalid_row_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("date,price\n2020-01-01,1\n2020-01-02,-2\n", encoding="utf-8")
        cfg = write_config(tmp_path, {"data": {"csv": str(bad)}, "strategies": [{"variant": "DCA"}]})
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_DATA
        assert "row 3" in capsys.readouterr().err


class TestBacktestCommand:
    def test_gas_example_outputs(self, tmp_path, capsys):
        cfg = gas_config(tmp_path)
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_OK
        out = tmp_path / "out"
        rows = read_comparison(out)
        assert [r["mu"] for r in rows] == ["0.75", "0.6"]
        report = json.loads((out / "report_DCA.json").read_text())
        assert report["mu"] == 0.75
        assert report["seed"] == 7 and report["rng"] == "numpy-pcg64"
        assert (out / "report_RHO_rho_1.json").exists()
        assert (out / "comparison.json").exists()
        printed = capsys.readouterr().out
        assert "rng=numpy-pcg64 seed=7" in printed

    def test_windows_config(self, tmp_path):
        sample = bundled_data_path("sample_appreciating_daily.csv")
        cfg = write_config(
            tmp_path,
            {
                "data": {"csv": str(sample)},
                "strategies": [{"variant": "DCA"}],
                "windows": {"length": "1y", "step": "1y"},
                "output": {"dir": str(tmp_path / "out")},
            },
        )
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_OK
        report = json.loads((tmp_path / "out" / "report_DCA.json").read_text())
        assert len(report["windows"]) == 6

    def test_partial_failure_exits_4(self, tmp_path):
        bad = tmp_path / "tiny.csv"
        bad.write_text("tick,price\n1,1.0\n2,0.000001\n", encoding="utf-8")
        cfg = write_config(
            tmp_path,
            {
                "data": {"csv": str(bad)},
                "strategies": [{"variant": "DCA"}, {"variant": "RHO", "rho": 3}],
                "output": {"dir": str(tmp_path / "out")},
            },
        )
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_PARTIAL
        rows = read_comparison(tmp_path / "out")
        assert [r["status"] for r in rows] == ["ok", "error"]

    def test_bundled_sample_mu_column_non_increasing(self, tmp_path):
        sample = bundled_data_path("sample_appreciating_daily.csv")
        cfg = write_config(
            tmp_path,
            {
                "data": {"csv": str(sample)},
                "strategies": [{"variant": "DCA"}] + [{"variant": "RHO", "rho": r} for r in (1, 2, 3)],
                "output": {"dir": str(tmp_path / "out")},
            },
        )
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_OK
        mus = [float(r["mu"]) for r in read_comparison(tmp_path / "out")]
        assert all(a >= b * (1 - 1e-9) for a, b in zip(mus, mus[1:]))

    def test_synthetic_source(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "seed": 11,
                "data": {"synthetic": {"n": 50, "lo": 0.0, "hi": 2.0}},
                "strategies": [{"variant": "DCA"}, {"variant": "F_RHO_OUT", "rho": 1, "modulator": "tanh"}],
                "output": {"dir": str(tmp_path / "out")},
            },
        )
        assert cli.main(["backtest", "--config", cfg]) == cli.EXIT_OK
        rows = read_comparison(tmp_path / "out")
        assert float(rows[1]["mu"]) <= float(rows[0]["mu"])


class TestCompareCommand:
    def test_prints_and_writes_table(self, tmp_path, capsys):
        cfg = gas_config(tmp_path)
        assert cli.main(["compare", "--config", cfg]) == cli.EXIT_OK
        assert (tmp_path / "out" / "comparison.csv").exists()
        printed = capsys.readouterr().out
        assert "DCA" in printed and "RHO(rho=1)" in printed


class TestSimulateCommand:
    def _config(self, tmp_path, out_name):
        return write_config(
            tmp_path,
            {
                "seed": 20240101,
                "simulate": {"n": 100, "lo": 0.0, "hi": 2.0, "rho_grid": [0, 1, 2, 3]},
                "output": {"dir": str(tmp_path / out_name)},
            },
            name=f"{out_name}.yaml",
        )

    def test_byte_identical_reruns(self, tmp_path):
        cfg_a = self._config(tmp_path, "sim_a")
        cfg_b = self._config(tmp_path, "sim_b")
        assert cli.main(["simulate", "--config", cfg_a]) == cli.EXIT_OK
        assert cli.main(["simulate", "--config", cfg_b]) == cli.EXIT_OK
        for name in ("simulate_mu.csv", "simulate_cash.csv", "simulate.json"):
            assert (tmp_path / "sim_a" / name).read_bytes() == (tmp_path / "sim_b" / name).read_bytes()

    def test_unbounded_blowup_vs_bounded(self, tmp_path):
        cfg = self._config(tmp_path, "sim")
        assert cli.main(["simulate", "--config", cfg]) == cli.EXIT_OK
        with (tmp_path / "sim" / "simulate_mu.csv").open() as fh:
            fh.readline()  # metadata comment
            rows = list(csv.DictReader(fh))
        unbounded = [r for r in rows if r["variant"] == "RHO" and r["rho"] == "3"]
        assert unbounded and float(unbounded[0]["max_single_investment"]) > 10.0
        bounded = [r for r in rows if r["variant"] in ("F_RHO_IN", "F_RHO_OUT")]
        assert bounded
        assert all(float(r["max_single_investment"]) <= 1.0 + 1e-9 for r in bounded)


class TestVerifyCommand:
    def _config(self, tmp_path):
        return write_config(
            tmp_path,
            {
                "verify": {"cs_vectors": 300, "chain_series": 10, "fd_vectors": 3},
                "output": {"dir": str(tmp_path / "ver")},
            },
        )

    def test_green_suite_exits_0(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        assert cli.main(["verify", "--config", cfg]) == cli.EXIT_OK
        verdict = json.loads((tmp_path / "ver" / "verdicts.json").read_text())
        assert verdict["all_hold"] is True
        out = capsys.readouterr().out
        assert "PASS cauchy_schwarz" in out

    def test_injected_fault_exits_3_with_witness(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        assert cli.main(["verify", "--config", cfg, "--inject-fault"]) == cli.EXIT_VERIFY
        out = capsys.readouterr().out
        assert "FAIL cauchy_schwarz" in out
        assert "witness" in out


class TestCalibrateCommand:
    def test_yearly_rows_and_exact_values(self, tmp_path, capsys):
        data = tmp_path / "cal.csv"
        data.write_text(
            "date,price\n2020-01-01,1\n2020-06-01,2\n2020-12-01,4\n2021-02-01,5\n2021-08-01,5\n",
            encoding="utf-8",
        )
        cfg = write_config(
            tmp_path,
            {"data": {"csv": str(data)}, "output": {"dir": str(tmp_path / "cal")}},
        )
        assert cli.main(["calibrate", "--config", cfg]) == cli.EXIT_OK
        result = json.loads((tmp_path / "cal" / "calibration.json").read_text())
        w2020, w2021 = result["windows"]
        assert w2020["x0"] == 0.625 and w2020["lambda"] == 0.09375
        assert w2021["floored"] is True
        assert "lambda floored" in capsys.readouterr().out

    def test_two_year_series_two_rows(self, tmp_path):
        sample = bundled_data_path("sample_appreciating_daily.csv")
        cfg = write_config(
            tmp_path, {"data": {"csv": str(sample)}, "output": {"dir": str(tmp_path / "cal")}}
        )
        assert cli.main(["calibrate", "--config", cfg]) == cli.EXIT_OK
        result = json.loads((tmp_path / "cal" / "calibration.json").read_text())
        assert [w["window"] for w in result["windows"]] == [str(y) for y in range(2018, 2024)]


class TestSeedOverride:
    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = gas_config(tmp_path)
        assert cli.main(["backtest", "--config", cfg, "--seed", "99"]) == cli.EXIT_OK
        assert "seed=99" in capsys.readouterr().out
