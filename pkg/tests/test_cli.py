import json
import subprocess
import sys

import pytest

from swapval.cli import run_cli
from swapval.config import (
    ConfigError,
    config_to_dict,
    emit_config,
    load_config,
    paper_defaults,
    parse_config,
)
from swapval.lifecycle import simulate_lifecycle
from swapval.market_data import synth_price_series
from swapval.report import emit_report

FAST = ["--synth", "two-level:10:90", "--days", "2", "--no-reserve"]
TINY_GRID = ["--mdc-grid", "0:20:10"]


def read(path):
    return path.read_bytes()


@pytest.fixture
def fast_config(tmp_path_factory):
    """paper-defaults with a 30-cycle battery, so lifecycles end quickly."""
    config = paper_defaults()
    data = config_to_dict(config)
    data["battery"]["cycle_life"] = 30.0
    path = tmp_path_factory.mktemp("cfg") / "fast.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestConfig:
    def test_paper_defaults_values(self):
        config = paper_defaults()
        assert config.battery.energy_capacity_0 == 2.7
        assert config.battery.power_limit == 2.7
        assert config.battery.efficiency == 0.95
        assert config.battery.cycle_life == 2000.0
        assert config.battery.eol_capacity_fraction == 0.8
        assert config.battery.calendar_fade_per_year == 0.01
        assert config.economics.discount_rate == 0.07
        assert config.swap.labor_cost == 10.0

    def test_round_trip(self, tmp_path):
        config = paper_defaults()
        path = tmp_path / "c.json"
        emit_config(config, str(path))
        again = load_config(str(path))
        assert again == config
        assert config_to_dict(again) == config_to_dict(config)

    def test_parse_rejects_bad_battery(self):
        data = config_to_dict(paper_defaults())
        data["battery"]["efficiency"] = 1.5
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nope/missing.json")


class TestRunCli:
    def test_simulate_happy_path(self, tmp_path, fast_config):
        out = tmp_path / "run"
        rc = run_cli(["simulate", "--mu", "35", "--config", fast_config,
                      "--out", str(out)] + FAST)
        assert rc == 0
        for name in ["lifecycle.json", "daily_log.csv", "soh.csv",
                     "cashflow.csv", "config.json"]:
            assert (out / name).exists(), name
        payload = json.loads((out / "lifecycle.json").read_text())
        assert payload["days_lived"] > 0
        assert payload["mu"] == 35.0

    def test_simulate_requires_mu(self, tmp_path):
        rc = run_cli(["simulate", "--config", "paper-defaults",
                      "--out", str(tmp_path / "x")] + FAST)
        assert rc == 2

    def test_optimize_mdc_flat_zero(self, tmp_path):
        out = tmp_path / "opt"
        rc = run_cli(["optimize-mdc", "--config", "paper-defaults", "--out", str(out),
                      "--synth", "flat:0", "--days", "1", "--no-reserve",
                      "--swap-cap", "0"] + TINY_GRID)
        assert rc == 0
        sweep = json.loads((out / "mdc_sweep.json").read_text())
        assert sweep["mu_star"] == 0.0
        assert sweep["lb_at_star"] == 0.0

    def test_missing_price_file_exits_3_and_names_path(self, tmp_path, capsys):
        out = tmp_path / "miss"
        rc = run_cli(["sweep-price", "--config", "paper-defaults", "--out", str(out),
                      "--price-file", "/nope/prices.csv", "--swap-cap", "2.7"])
        assert rc == 3
        err = capsys.readouterr().err
        record = json.loads(err.strip().splitlines()[-1])
        assert "/nope/prices.csv" in record["message"]
        assert record["exit_code"] == 3
        assert json.loads((out / "error.json").read_text()) == record

    def test_bad_config_exits_2(self, tmp_path):
        rc = run_cli(["simulate", "--mu", "1", "--config", "/nope/c.json",
                      "--out", str(tmp_path / "y")])
        assert rc == 2

    def test_malformed_config_json_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        rc = run_cli(["simulate", "--mu", "1", "--config", str(bad),
                      "--out", str(tmp_path / "z")])
        assert rc == 2

    def test_determinism_byte_identical(self, tmp_path, fast_config):
        args = ["optimize-mdc", "--config", fast_config,
                "--seed", "3"] + FAST + TINY_GRID
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(args + ["--out", str(out1)]) == 0
        assert run_cli(args + ["--out", str(out2)]) == 0
        for name in ["mdc_sweep.csv", "mdc_sweep.json", "config.json"]:
            assert read(out1 / name) == read(out2 / name), name

    def test_sweep_price_and_refine(self, tmp_path, fast_config):
        out = tmp_path / "sw"
        rc = run_cli(["sweep-price", "--config", fast_config, "--out", str(out),
                      "--price-grid", "0:100:50", "--swap-cap", "2.0"]
                     + FAST + TINY_GRID)
        assert rc == 0
        lines = (out / "price_sweep.csv").read_text().splitlines()
        assert lines[0] == "swap_price,mu_star,lb_star,abu,days_lived"
        assert len(lines) == 4

    def test_optimize_curve_price(self, tmp_path, fast_config):
        out = tmp_path / "curve"
        rc = run_cli(["optimize-curve-price", "--config", fast_config,
                      "--out", str(out), "--curve=-10,180", "--curve=-40,180",
                      "--price-grid", "50:150:50"] + FAST + TINY_GRID)
        assert rc == 0
        optima = json.loads((out / "curve_optima.json").read_text())["optima"]
        assert len(optima) == 2
        assert (out / "curve_optima.csv").exists()

    def test_eol_sensitivity(self, tmp_path, fast_config):
        out = tmp_path / "eol"
        rc = run_cli(["eol", "--config", fast_config, "--out", str(out),
                      "--mu", "20", "--om-grid", "0:16:8"] + FAST)
        assert rc == 0
        lines = (out / "eol_sensitivity.csv").read_text().splitlines()
        assert lines[0] == "om_per_kw_year,mode,mu,economic_eol_year,physical_eol_year"
        # two modes x three O&M points
        assert len(lines) == 7

    def test_refine_step_flag(self, tmp_path, fast_config):
        out = tmp_path / "ref"
        rc = run_cli(["optimize-mdc", "--config", fast_config, "--out", str(out),
                      "--refine-step", "5"] + FAST + TINY_GRID)
        assert rc == 0
        assert (out / "mdc_sweep_refined.csv").exists()

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "swapval.cli", "simulate", "--mu", "0",
             "--config", "paper-defaults", "--out", str(tmp_path / "m"),
             "--synth", "flat:0", "--days", "1", "--no-reserve", "--swap-cap", "0"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        payload = json.loads((tmp_path / "m" / "lifecycle.json").read_text())
        assert payload["lb_star"] == 0.0
        assert abs(payload["days_lived"] - 7300) <= 1


class TestEmitReport:
    def test_lifecycle_emission(self, tmp_path, tiny_battery, econ):
        series = synth_price_series("two-level", days=1, low=10.0, high=90.0)
        result = simulate_lifecycle(tiny_battery, econ, series, 10.0,
                                    swap_policy=None, reserve_enabled=False)
        paths = emit_report(result, "both", str(tmp_path))
        names = sorted(p.split("/")[-1] for p in paths)
        assert names == ["cashflow.csv", "daily_log.csv", "lifecycle.json", "soh.csv"]
        # json-only keeps just the document
        sub = tmp_path / "json_only"
        paths = emit_report(result, "json", str(sub))
        assert [p.split("/")[-1] for p in paths] == ["lifecycle.json"]

    def test_rejects_unknown_format(self, tmp_path, tiny_battery, econ):
        series = synth_price_series("flat", days=1, level=0.0)
        result = simulate_lifecycle(tiny_battery, econ, series, 0.0,
                                    swap_policy=None, reserve_enabled=False)
        with pytest.raises(ValueError):
            emit_report(result, "xml", str(tmp_path))

    def test_soh_csv_matches_series(self, tmp_path, tiny_battery, econ):
        series = synth_price_series("flat", days=1, level=0.0)
        result = simulate_lifecycle(tiny_battery, econ, series, 0.0,
                                    swap_policy=None, reserve_enabled=False)
        emit_report(result, "csv", str(tmp_path))
        lines = (tmp_path / "soh.csv").read_text().splitlines()
        assert lines[0] == "day,soh"
        assert len(lines) == 1 + result.days_lived
        first = lines[1].split(",")
        assert float(first[1]) == 1.0
