"""Command-line surface: dispatch, configuration validation, artifacts."""

import pytest

from pentadrive.cli import ConfigError, parse_and_dispatch, parse_config_text
from pentadrive.machine import MachineParams


class TestConfigParsing:
    def test_empty_text_gives_defaults(self):
        cfg = parse_config_text("")
        assert cfg.machine == MachineParams()
        assert cfg.plant.ts == 35e-6
        assert cfg.sweep.fe_list == (10.0, 20.0, 30.0, 40.0, 50.0)
        assert cfg.sweep.is_levels == 25
        assert [v.kind for v in cfg.sweep.variants] == \
            ["sv-zl", "vvv", "sv-zl", "sv-zw"]

    def test_full_file(self):
        cfg = parse_config_text(
            "# comment\n"
            "machine.Vdc = 520\n"
            "plant.ts = 5e-5\n"
            "plant.substeps = 14\n"
            "sweep.fe = 25, 50\n"
            "sweep.is_levels = 7\n"
            "sweep.variants = sv-zl, vvv, sv-zw:0.72:0\n"
            "controller.variant = vvv\n"
            "controller.fe = 25\n"
            "controller.is = 0.4\n")
        assert cfg.machine.Vdc == 520
        assert cfg.plant.ts == 5e-5 and cfg.plant.substeps_per_ts == 14
        assert cfg.sweep.fe_list == (25.0, 50.0)
        assert cfg.sweep.variants[2].lambda_xy == 0.72
        assert cfg.variant.kind == "vvv"
        assert cfg.fe == 25 and cfg.is_star == 0.4

    def test_every_error_is_reported(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text(
                "machine.Rs = fast\n"
                "nonsense line\n"
                "plant.ts = -3\n"
                "controller.lambda_xy = -1\n"
                "sweep.bogus = 1\n")
        msgs = err.value.errors
        assert len(msgs) >= 4
        joined = "\n".join(msgs)
        assert "line 1" in joined and "machine.Rs" in joined
        assert "line 2" in joined
        assert "ts" in joined
        assert "lambda_xy" in joined
        assert "sweep.bogus" in joined

    def test_negative_weight_names_constraint(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("controller.lambda_xy = -1\n")
        assert "lambda_xy" in str(err.value)
        assert ">= 0" in str(err.value)

    def test_overrides_win(self):
        cfg = parse_config_text("machine.Vdc = 100\n",
                                overrides=(("machine.Vdc", "250"),))
        assert cfg.machine.Vdc == 250


class TestDispatch:
    def test_tables(self, tmp_path, capsys):
        rc = parse_and_dispatch(["tables", "--vdc", "300",
                                 "--out", str(tmp_path)])
        assert rc == 0
        vv_lines = (tmp_path / "vv_table.csv").read_text().splitlines()
        vvv_lines = (tmp_path / "vvv_table.csv").read_text().splitlines()
        assert len(vv_lines) == 33 and len(vvv_lines) == 12

    def test_single_writes_report_and_trace(self, tmp_path):
        rc = parse_and_dispatch([
            "single", "--variant", "vvv", "--fe", "50", "--is", "0.6",
            "--out", str(tmp_path),
            "sweep.warmup_periods=1", "sweep.measure_periods=2"])
        assert rc == 0
        metrics = (tmp_path / "single_metrics.csv").read_text().splitlines()
        assert len(metrics) == 2
        assert metrics[1].startswith("vvv,50.0,0.6,")
        trace = tmp_path / "trace_vvv_50_0.6.csv"
        assert trace.exists() and len(trace.read_text().splitlines()) > 100

    def test_single_without_trace(self, tmp_path):
        rc = parse_and_dispatch([
            "single", "--variant", "sv-zl", "--fe", "50", "--is", "0.4",
            "--no-trace", "--out", str(tmp_path),
            "sweep.warmup_periods=1", "sweep.measure_periods=2"])
        assert rc == 0
        assert not list(tmp_path.glob("trace_*.csv"))

    def test_sweep_and_reproducibility(self, tmp_path):
        args = ["sweep", "--out", None,
                "sweep.fe=50", "sweep.is_list=0.3,0.6",
                "sweep.variants=sv-zl,vvv",
                "sweep.warmup_periods=1", "sweep.measure_periods=2"]
        outputs = []
        for sub in ("a", "b"):
            args[2] = str(tmp_path / sub)
            assert parse_and_dispatch(args) == 0
            outputs.append((tmp_path / sub / "metrics.csv").read_bytes())
        assert outputs[0] == outputs[1]
        lines = outputs[0].decode().splitlines()
        assert len(lines) == 1 + 2 * 2
        meta = (tmp_path / "a" / "sweep_meta.txt").read_text()
        assert "is_list = 0.3, 0.6" in meta

    def test_sweep_trace_points(self, tmp_path):
        rc = parse_and_dispatch([
            "sweep", "--out", str(tmp_path), "--trace", "50:0.6",
            "sweep.fe=50", "sweep.is_list=0.3,0.6", "sweep.variants=sv-zl,vvv",
            "sweep.warmup_periods=1", "sweep.measure_periods=2"])
        assert rc == 0
        assert (tmp_path / "trace_sv-zl_50_0.6.csv").exists()
        assert (tmp_path / "trace_vvv_50_0.6.csv").exists()

    def test_ts_override_echoed_in_meta(self, tmp_path):
        rc = parse_and_dispatch([
            "sweep", "--ts", "3.5e-5", "--out", str(tmp_path),
            "sweep.fe=50", "sweep.is_list=0.4", "sweep.variants=sv-zl",
            "sweep.warmup_periods=1", "sweep.measure_periods=1"])
        assert rc == 0
        assert "ts = 3.5e-05" in (tmp_path / "sweep_meta.txt").read_text()

    def test_invalid_config_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("controller.lambda_xy = -1\nwhat\n")
        rc = parse_and_dispatch(["single", "--config", str(bad)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "lambda_xy" in err and "line 2" in err

    def test_unknown_flag_fails(self):
        assert parse_and_dispatch(["sweep", "--frobnicate"]) != 0

    def test_missing_config_file(self, tmp_path):
        rc = parse_and_dispatch(["sweep", "--config",
                                 str(tmp_path / "absent.cfg")])
        assert rc == 1

    def test_bad_override_shape(self, tmp_path):
        rc = parse_and_dispatch(["tables", "--out", str(tmp_path), "oops"])
        assert rc == 2
