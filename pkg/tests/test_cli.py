"""Experiment driver: configs, manifests, exit codes, output formats."""

import json
import os

import numpy as np
import pytest

from batchelor_lab import exports, spectral
from batchelor_lab.cli import main
from batchelor_lab.config import ConfigError, RunConfig, RunManifest
from batchelor_lab.spectral import GridField


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {"kappa": 0.01, "cutoff": 6, "dt": 1e-3, "horizon": 0.2, "seed": 1,
           "cadence": 0.05, "initial_condition": "random-shell",
           "shell_radius": 3, "out_dir": str(tmp_path / "out")}
    cfg.update(overrides)
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p, cfg


class TestRunConfig:
    def test_hash_excludes_out_dir(self):
        a = RunConfig(kappa=0.01, out_dir="x")
        b = RunConfig(kappa=0.01, out_dir="y")
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != RunConfig(kappa=0.02).config_hash()

    def test_validation(self):
        with pytest.raises(ConfigError):
            RunConfig(kappa=-1.0)
        with pytest.raises(ConfigError):
            RunConfig(kappa=0.0, scheme="rk4")
        with pytest.raises(ConfigError):
            RunConfig(kappa=0.0, shell_radius=100, cutoff=8)
        with pytest.raises(ConfigError):
            RunConfig(kappa=0.0, schema_version=99)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            RunConfig.from_dict({"kappa": 0.0, "kappas": [1]})

    def test_round_trip(self, tmp_path):
        cfg = RunConfig(kappa=0.01, s_grid=(0.5, 1.0))
        p = tmp_path / "c.json"
        cfg.save(p)
        assert RunConfig.load(p) == cfg


class TestRunCommand:
    def test_zero_horizon_initial_snapshot_only(self, tmp_path):
        p, cfg = write_config(tmp_path, horizon=0.0)
        assert main(["run", "--config", str(p)]) == 0
        files = sorted(os.listdir(cfg["out_dir"]))
        assert "manifest.json" in files and "summary.json" in files
        snaps = [f for f in files if f.startswith("snapshot")]
        assert snaps == ["snapshot_t0.0000.csv", "snapshot_t0.0000.pgm"]

    def test_replay_is_bit_identical(self, tmp_path):
        p1, c1 = write_config(tmp_path, "a.json", out_dir=str(tmp_path / "o1"))
        p2, c2 = write_config(tmp_path, "b.json", out_dir=str(tmp_path / "o2"))
        assert main(["run", "--config", str(p1)]) == 0
        assert main(["run", "--config", str(p2)]) == 0
        s1 = (tmp_path / "o1" / "summary.json").read_text()
        s2 = (tmp_path / "o2" / "summary.json").read_text()
        assert s1 == s2
        m1 = RunManifest.load(tmp_path / "o1" / "manifest.json")
        m2 = RunManifest.load(tmp_path / "o2" / "manifest.json")
        assert m1.config_hash == m2.config_hash
        assert m1.outputs == m2.outputs

    def test_missing_config_is_exit_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2

    def test_invalid_config_is_exit_2(self, tmp_path):
        p, _ = write_config(tmp_path, kappa=-3.0)
        assert main(["run", "--config", str(p)]) == 2

    def test_unstable_em_is_exit_3(self, tmp_path):
        p, _ = write_config(tmp_path, scheme="euler-maruyama", dt=0.5,
                            cutoff=16, horizon=1.0)
        assert main(["run", "--config", str(p)]) == 3

    def test_series_is_valid_ndjson(self, tmp_path):
        p, cfg = write_config(tmp_path)
        assert main(["run", "--config", str(p)]) == 0
        recs = exports.read_ndjson(os.path.join(cfg["out_dir"], "series.ndjson"))
        assert recs[0]["t"] == 0.0
        assert {"l2", "low_mode_l2", "ell", "kappa", "seed"} <= set(recs[0])


class TestSweepCommand:
    def test_two_kappa_sweep_with_fit(self, tmp_path):
        plan = {"kappas": [0.04, 0.01], "ensemble": 2,
                "base": {"kappa": 0.0, "cutoff": 8, "dt": 2e-3, "horizon": 0.5,
                         "cadence": 0.05, "initial_condition": "random-shell",
                         "shell_radius": 3}}
        p = tmp_path / "sweep.json"
        p.write_text(json.dumps(plan))
        out = tmp_path / "sw"
        assert main(["sweep", "--config", str(p), "--out", str(out)]) == 0
        report = json.loads((out / "sweep.json").read_text())
        assert not report["batchelor_fit"]["degenerate"]
        assert report["failures"] == []
        for k in ("0.04", "0.01"):
            assert len(report["groups"][k]) == 2
        assert (out / "kappa_0.04" / "figure_snapshot.csv").exists()

    def test_single_kappa_fit_degenerate(self, tmp_path):
        plan = {"kappas": [0.04], "ensemble": 1,
                "base": {"kappa": 0.0, "cutoff": 6, "dt": 2e-3, "horizon": 0.2,
                         "cadence": 0.05, "initial_condition": "cos-x"}}
        p = tmp_path / "sweep.json"
        p.write_text(json.dumps(plan))
        out = tmp_path / "sw1"
        assert main(["sweep", "--config", str(p), "--out", str(out)]) == 0
        report = json.loads((out / "sweep.json").read_text())
        assert report["batchelor_fit"]["degenerate"]

    def test_empty_kappa_list_is_exit_2(self, tmp_path):
        plan = {"kappas": [], "ensemble": 1, "base": {"kappa": 0.0}}
        p = tmp_path / "sweep.json"
        p.write_text(json.dumps(plan))
        assert main(["sweep", "--config", str(p)]) == 2


class TestCheckCommand:
    def test_small_run_exits_zero(self, capsys):
        assert main(["check", "--trials", "500"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["failures"] == []

    def test_single_trial(self, capsys):
        assert main(["check", "--trials", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["trials"] == 1

    def test_zero_trials_is_exit_2(self):
        assert main(["check", "--trials", "0"]) == 2


class TestLagrangianCommand:
    def test_report_fields(self, tmp_path, capsys):
        code = main(["lagrangian", "--particles", "200", "--dt", "1e-3",
                     "--horizon", "1.0", "--out", str(tmp_path / "lag")])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["lambda_positive"]
        assert rep["det_jacobian_error"] < 1e-9
        assert rep["cap_table"]["1.0"] == pytest.approx(rep["lambda_hat"])
        assert (tmp_path / "lag" / "trajectories.csv").exists()


class TestMixingCommand:
    def test_kappa_positive_rejected(self, tmp_path):
        p, _ = write_config(tmp_path, kappa=0.01)
        assert main(["mixing", "--config", str(p)]) == 2

    def test_kappa_zero_report(self, tmp_path):
        p, cfg = write_config(tmp_path, kappa=0.0, cutoff=12, horizon=1.0,
                              initial_condition="cos-x")
        assert main(["mixing", "--config", str(p), "--s-grid", "0.5", "1"]) == 0
        rep = json.loads((tmp_path / "out" / "mixing.json").read_text())
        assert set(rep["gamma_s"]) == {"0.5", "1.0"}
        assert rep["cap_2pi_sq"] == pytest.approx(2 * np.pi**2)


class TestExports:
    def test_pgm_round_trip_extremes(self, tmp_path):
        vals = np.array([[-2.0, 0.0], [1.0, 2.0]])
        p = tmp_path / "f.pgm"
        exports.write_pgm(GridField(2, vals), p)
        pix, maxval = exports.read_pgm(p)
        assert maxval == 65535
        assert pix.min() == 0 and pix.max() == 65535

    def test_grid_matrix_headers(self, tmp_path):
        f = spectral.cos_x_field(2, 2)
        g = spectral.to_physical(f, 5)
        p = tmp_path / "m.csv"
        exports.write_grid_matrix_csv(g, p)
        lines = p.read_text().splitlines()
        header = lines[0].split(",")
        assert header[0] == r"y\x"
        assert [float(x) for x in header[1:]] == pytest.approx(
            [0.0, 0.2, 0.4, 0.6, 0.8])
        assert len(lines) == 6
        # body transposed correctly: value at (x=0.2, y=0) is 2 cos(2 pi 0.2)
        row0 = lines[1].split(",")
        assert float(row0[2]) == pytest.approx(2 * np.cos(2 * np.pi * 0.2))

    def test_spectrum_heatmap_rows(self, tmp_path):
        f = spectral.cos_x_field(2, 2)
        p = tmp_path / "s.csv"
        exports.write_spectrum_heatmap_csv(f, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "k1,k2,log10_power"
        assert len(lines) == 1 + 25
        rows = {tuple(l.split(",")[:2]): float(l.split(",")[2]) for l in lines[1:]}
        assert rows[("1", "0")] == pytest.approx(0.0)  # power 1 -> log10 = 0

    def test_export_figure_data_from_cli(self, tmp_path):
        f = spectral.cos_x_field(2, 4)
        snap = tmp_path / "snap.csv"
        spectral.write_csv(f, snap)
        prefix = str(tmp_path / "fig")
        assert main(["export-figure-data", "--snapshot", str(snap),
                     "--out-prefix", prefix]) == 0
        for suffix in ("_snapshot.csv", "_spectrum.csv", "_shells.csv"):
            assert os.path.exists(prefix + suffix)
