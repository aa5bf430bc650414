import json

import numpy as np
import pytest

from ldma.cli import main
from ldma.codebook import load_codebook
from ldma.harness import default_config


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


class TestValidate:
    def test_valid_config(self, tmp_path, capsys):
        path = write_config(tmp_path, {"scenario_kind": "correlation_sweep"})
        assert main(["validate", path]) == 0
        assert "ok" in capsys.readouterr().out

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        path = write_config(tmp_path, {"scenario_kind": "correlation_sweep", "zap": 1})
        assert main(["validate", path]) == 2
        assert "zap" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["validate", str(tmp_path / "absent.json")]) == 2


class TestRun:
    def test_correlation_sweep_run(self, tmp_path):
        config = default_config("correlation_sweep")
        config["antenna_grid"] = [65, 129]
        path = write_config(tmp_path, config)
        out = tmp_path / "results"
        assert main(["run", path, "--out", str(out)]) == 0
        assert (out / "correlation_sweep.csv").exists()
        assert (out / "correlation_sweep_manifest.json").exists()

    def test_seed_and_trials_overrides(self, tmp_path):
        config = default_config("linear_multipath")
        config["array"]["num_antennas"] = 65
        config["sys"]["num_users"] = 2
        config["snr_grid"] = [10.0]
        config["num_trials"] = 2
        path = write_config(tmp_path, config)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", path, "--out", str(out_a), "--seed", "5", "--trials", "3"]) == 0
        manifest = json.loads((out_a / "linear_multipath_manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["config"]["num_trials"] == 3
        # identical override run is byte-identical
        assert main(["run", path, "--out", str(out_b), "--seed", "5", "--trials", "3"]) == 0
        assert (out_a / "linear_multipath.csv").read_bytes() == (
            out_b / "linear_multipath.csv"
        ).read_bytes()

    def test_workers_flag_preserves_bytes(self, tmp_path):
        config = default_config("linear_multipath")
        config["array"]["num_antennas"] = 65
        config["sys"]["num_users"] = 2
        config["snr_grid"] = [0.0]
        config["num_trials"] = 4
        path = write_config(tmp_path, config)
        out_a, out_b = tmp_path / "w1", tmp_path / "w2"
        assert main(["run", path, "--out", str(out_a), "--workers", "1"]) == 0
        assert main(["run", path, "--out", str(out_b), "--workers", "2"]) == 0
        assert (out_a / "linear_multipath.csv").read_bytes() == (
            out_b / "linear_multipath.csv"
        ).read_bytes()


class TestSweepCorrelation:
    def test_custom_pair_and_grid(self, tmp_path):
        out = tmp_path / "sweep"
        code = main(
            [
                "sweep-correlation",
                "--antenna-grid",
                "65,129",
                "--pair",
                "5,15,0.5235987755982988",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        text = (out / "correlation_sweep.csv").read_text()
        assert "closed_form" in text

    def test_bad_pair_exits_2(self, tmp_path):
        assert main(["sweep-correlation", "--pair", "5,15", "--out", str(tmp_path)]) == 2


class TestCodebookBuild:
    def test_polar_build(self, tmp_path):
        out = tmp_path / "cb.json"
        code = main(
            [
                "codebook",
                "build",
                "--kind",
                "polar",
                "--num-antennas",
                "65",
                "--carrier-frequency",
                "3e10",
                "--r-min",
                "4",
                "--coherence-target",
                "0.5",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        cb = load_codebook(out)
        assert cb.kind == "polar"
        assert np.allclose(np.linalg.norm(cb.codewords, axis=0), 1.0, atol=1e-12)

    def test_even_antennas_exit_2(self, tmp_path):
        code = main(
            [
                "codebook",
                "build",
                "--kind",
                "dft",
                "--num-antennas",
                "64",
                "--carrier-frequency",
                "3e10",
                "--out",
                str(tmp_path / "cb.json"),
            ]
        )
        assert code == 2

    def test_bad_target_exit_2(self, tmp_path):
        code = main(
            [
                "codebook",
                "build",
                "--kind",
                "polar",
                "--num-antennas",
                "65",
                "--carrier-frequency",
                "3e10",
                "--coherence-target",
                "1.5",
                "--out",
                str(tmp_path / "cb.json"),
            ]
        )
        assert code == 2
