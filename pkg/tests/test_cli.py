"""Subcommand behavior, exit codes, and the end-to-end CSV workflow."""

import json

from rnnp.cli import main
from rnnp.series import ingest_csv


class TestPbonacci:
    def test_prints_partial_sum(self, capsys):
        assert main(["pbonacci", "--p", "2", "--n", "6"]) == 0
        out = capsys.readouterr().out
        assert "20" in out  # S_6
        assert "sum identity" in out

    def test_csv_format(self, capsys):
        assert main(["pbonacci", "--p", "3", "--n", "5", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("n,x_n,s_n")
        assert lines[-1].startswith("5,7,15")


class TestGradcheck:
    def test_exit_zero_on_correct_build(self, tmp_path, capsys):
        out = str(tmp_path / "report.csv")
        assert main(["gradcheck", "--seeds", "4", "--out", out]) == 0
        assert "0 failures" in capsys.readouterr().out
        assert (tmp_path / "report.csv").exists()


class TestBench:
    def test_tau_sweep_writes_csv(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"bench": {"tau_min": 3, "tau_max": 6, "engines": ["trrl"]}})
        )
        out = str(tmp_path / "bench.csv")
        assert main(["bench", "--mode", "tau", "--config", str(config), "--out", out]) == 0
        with open(out) as f:
            assert len(f.read().strip().splitlines()) == 5  # header + 4 taus


class TestConfigValidation:
    def test_unknown_section_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tpyo": {}}))
        out = str(tmp_path / "bench.csv")
        assert main(["bench", "--config", str(config), "--out", out]) == 2

    def test_unknown_key_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"synth": {"yeears": 1}}))
        assert main(["synth", "--config", str(config), "--out", "x.csv"]) == 2

    def test_missing_config_file(self):
        assert main(["synth", "--config", "/nonexistent.json", "--out", "x.csv"]) == 2

    def test_data_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("timestamp,demand_mwh,drybulb_f,wetbulb_f\n")
        assert (
            main(
                [
                    "train",
                    "--data",
                    str(bad),
                    "--out",
                    str(tmp_path / "ck.json"),
                ]
            )
            == 3
        )


class TestEndToEndWorkflow:
    def test_synth_train_forecast_evaluate(self, tmp_path, capsys):
        data = str(tmp_path / "data.csv")
        assert main(["synth", "--out", data, "--years", "2", "--seed", "11"]) == 0
        series = ingest_csv(data)
        assert len(series) == (365 + 366) * 24

        config = tmp_path / "config.json"
        config.write_text(
            json.dumps(
                {
                    "seed": 5,
                    "model": {"lags": [1], "hidden_dim": 3, "loss": "gaussian_nll",
                              "tau": 12},
                    "train": {
                        "engine": "trrl",
                        "learning_rate": 5e-3,
                        "batch_size": 32,
                        "max_epochs": 2,
                        "patience": 5,
                        "stride": 73,
                        "train_start": "2007-01-01T00:00:00",
                        "train_end": "2008-01-01T00:00:00",
                    },
                }
            )
        )
        checkpoint = str(tmp_path / "model.rnnp.json")
        history = str(tmp_path / "history.csv")
        assert (
            main(
                [
                    "train",
                    "--config",
                    str(config),
                    "--data",
                    data,
                    "--out",
                    checkpoint,
                    "--history",
                    history,
                ]
            )
            == 0
        )
        with open(history) as f:
            lines = f.read().strip().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss,seconds"
        assert len(lines) == 3

        forecasts = str(tmp_path / "forecast.csv")
        assert (
            main(
                [
                    "forecast",
                    "--checkpoint",
                    checkpoint,
                    "--data",
                    data,
                    "--start",
                    "2008-02-01T00:00:00",
                    "--end",
                    "2008-02-03T00:00:00",
                    "--out",
                    forecasts,
                ]
            )
            == 0
        )

        report = str(tmp_path / "report.json")
        assert (
            main(
                [
                    "evaluate",
                    "--forecasts",
                    forecasts,
                    "--data",
                    data,
                    "--out",
                    report,
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "RMSE" in out
        with open(report) as f:
            payload = json.load(f)
        assert set(payload) >= {"rmse_mwh", "mape_pct"}

    def test_synth_determinism_across_invocations(self, tmp_path):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        main(["synth", "--out", a, "--years", "1", "--seed", "3"])
        main(["synth", "--out", b, "--years", "1", "--seed", "3"])
        assert open(a).read() == open(b).read()
