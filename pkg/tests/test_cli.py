import json

import pytest

from ipflab import cli


class TestInvariantsCommand:
    def test_prints_full_set(self, capsys):
        assert cli.main(["invariants", "--gamma", "0.5"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["a"] == 0.252 and "provenance" in doc

    def test_gamma_required(self):
        with pytest.raises(SystemExit):
            cli.main(["invariants"])


class TestReproduce:
    def test_exit_zero_and_table_written(self, tmp_path, capsys):
        assert cli.main(["reproduce", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "reproduction.json").read_text())
        assert doc["schema_version"] == "1"
        assert len(doc["rows"]) >= 15

    def test_exactly_two_flag_rows(self):
        table = cli.reproduction_table()
        flags = [r["name"] for r in table if r["status"] == "FLAG"]
        assert sorted(flags) == sorted([
            "a formula at gamma=0.5 vs tabulated 0.25",
            "spread formula vs spectrum ratio (n=2)"])


class TestNetworkCommand:
    def test_one_node(self, capsys):
        assert cli.main(["network", "--n", "3", "--gamma", "0.5",
                         "--alpha1", "1.0"]) == 0
        out = capsys.readouterr().out
        assert '"node_count": 1' in out and "code: AAAB" in out


class TestScheduleCommand:
    def test_chain_and_schedule_emitted(self, capsys):
        assert cli.main(["schedule", "--n", "3", "--gamma", "0.5",
                         "--alpha1", "1.0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["chain"]["intervals"]) == 2
        assert len(doc["schedule"]["segments"]) == 3


class TestStochasticCommands:
    def test_seed_mandatory(self):
        with pytest.raises(SystemExit):
            cli.main(["simulate"])

    def test_simulate_writes_csv(self, tmp_path):
        assert cli.main(["simulate", "--seed", "1", "--n-paths", "200",
                         "--dt", "0.02", "--horizon", "0.2",
                         "--format", "csv", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "ensemble.csv").read_text()
        assert text.startswith("# schema_version=1")

    def test_entropy_reports_both_estimates(self, capsys):
        assert cli.main(["entropy", "--seed", "3", "--n-paths", "2000",
                         "--theta", "1.0", "--dt", "0.005"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["monte_carlo"]["value"] > 0
        assert doc["covariance_form"]["value"] == pytest.approx(2.1459, rel=0.01)

    def test_identify_reports_four_methods(self, capsys):
        assert cli.main(["identify", "--seed", "5", "--n-paths", "2000",
                         "--dt", "0.005", "--horizon", "1.0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        methods = [r["method"] for r in doc["reports"]]
        assert methods == ["reduced-control", "covariance-ratio",
                           "dispersion-window", "closed-loop"]


class TestPipeline:
    ARGS = ["pipeline", "--seed", "2", "--n-paths", "300", "--dt", "0.01",
            "--horizon", "0.5", "--n", "3", "--gamma", "0.5",
            "--alpha1", "1.0"]

    def test_manifest_lists_five_artifacts(self, tmp_path):
        assert cli.main(self.ARGS + ["--out", str(tmp_path)]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["artifacts"]) == 5
        net = json.loads((tmp_path / "network.json").read_text())
        assert net["totals"]["node_count"] == 1

    def test_rerun_byte_identical(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        cli.main(self.ARGS + ["--out", str(out1)])
        cli.main(self.ARGS + ["--out", str(out2)])
        for name in json.loads((out1 / "manifest.json").read_text())["artifacts"]:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_bad_n_paths_rejected(self, tmp_path):
        args = ["pipeline", "--seed", "2", "--n-paths", "0", "--n", "3",
                "--gamma", "0.5", "--alpha1", "1.0", "--dt", "0.01",
                "--horizon", "0.5", "--out", str(tmp_path)]
        assert cli.main(args) == 1


class TestConfigPrecedence:
    def test_config_overrides_default_but_not_flag(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"gamma": 0.3}))
        assert cli.main(["--config", str(cfg), "invariants"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["gamma"] == 0.3
        assert cli.main(["--config", str(cfg), "invariants",
                         "--gamma", "0.5"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["gamma"] == 0.5
