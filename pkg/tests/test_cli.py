"""Command-line interface tests: config parsing, outputs, exit codes."""

import json

import numpy as np
import pytest

from emhd1d.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    RunConfig,
    cmd_selftest,
    main,
    parse_config_text,
)

RUN_CFG = """
# small smooth run
grid.L = 3.141592653589793
grid.N = 128
model.kind = full
model.mu = 1.0
model.alpha = 2.0
stepper.dt_init = 1e-3
stepper.t_end = 0.05
outputs.snapshot_cadence = 10
diagnostics.s_list = 0.0, 1.0
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(RUN_CFG)
    return p


class TestConfigParsing:
    def test_key_value_with_comments(self):
        kv = parse_config_text("a.b = 1  # trailing\n\n# full line\nc.d = x y\n")
        assert kv == {"a.b": "1", "c.d": "x y"}

    def test_missing_equals_raises(self):
        with pytest.raises(ConfigError):
            parse_config_text("just a line\n")

    def test_empty_value_raises(self):
        with pytest.raises(ConfigError):
            parse_config_text("a.b =\n")

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("grid.M = 3\n")
        with pytest.raises(ConfigError):
            RunConfig.from_file(p)

    def test_bad_value_rejected(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("grid.N = many\n")
        with pytest.raises(ConfigError):
            RunConfig.from_file(p)

    def test_invalid_grid_rejected(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("grid.N = 7\n")
        with pytest.raises(ConfigError):
            RunConfig.from_file(p)

    def test_typed_fields(self, cfg_file):
        cfg = RunConfig.from_file(cfg_file)
        assert cfg.grid_N == 128
        assert cfg.diagnostics_s_list == (0.0, 1.0)
        assert cfg.model_alpha == 2.0


class TestCommands:
    def test_run_writes_outputs(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        code = main(["run", "--config", str(cfg_file), "--out", str(out)])
        assert code == EXIT_OK
        for name in ("series.csv", "snapshots.bin", "snapshots.json", "manifest.json"):
            assert (out / name).is_file()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["termination"] == "t_end"
        assert manifest["config"] == RunConfig.from_file(cfg_file).raw
        sidecar = json.loads((out / "snapshots.json").read_text())
        data = np.fromfile(out / "snapshots.bin", dtype="<f8").reshape(sidecar["shape"])
        assert data.shape[1] == 128

    def test_run_deterministic(self, cfg_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg_file), "--out", str(out1)])
        main(["run", "--config", str(cfg_file), "--out", str(out2)])
        assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
        assert (out1 / "snapshots.bin").read_bytes() == (out2 / "snapshots.bin").read_bytes()

    def test_missing_config_is_config_error(self, tmp_path):
        code = main(["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG

    def test_config_required(self, tmp_path):
        assert main(["run", "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_symmetry_command(self, cfg_file, tmp_path):
        out = tmp_path / "sym"
        code = main(["symmetry", "--config", str(cfg_file), "--out", str(out)])
        assert code == EXIT_OK
        rep = json.loads((out / "symmetry.json").read_text())
        assert rep["rel_l2_mismatch"] <= 1e-6

    def test_lp_command(self, tmp_path):
        p = tmp_path / "lp.cfg"
        p.write_text("grid.L = 3.141592653589793\ngrid.N = 256\n")
        out = tmp_path / "lp"
        code = main(["lp", "--config", str(p), "--out", str(out)])
        assert code == EXIT_OK
        rep = json.loads((out / "lp_report.json").read_text())
        assert rep["bernstein"][0]["max_ratio"] <= 4.0

    def test_selftest(self, tmp_path):
        assert cmd_selftest(tmp_path) == EXIT_OK
        worst = json.loads((tmp_path / "selftest.json").read_text())
        assert all(v <= 1e-10 for v in worst.values())

    def test_sweep(self, cfg_file, tmp_path, monkeypatch):
        monkeypatch.setenv("EMHD1D_THREADS", "2")
        sweep = tmp_path / "sweep.txt"
        sweep.write_text(f"{cfg_file}\n{cfg_file}\n")
        out = tmp_path / "sw"
        code = main(["run", "--sweep", str(sweep), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "sweep_000" / "series.csv").is_file()
        assert (out / "sweep_001" / "series.csv").is_file()

    def test_sweep_missing_file(self, tmp_path):
        assert main(["run", "--sweep", str(tmp_path / "no.txt"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_datum_from_file(self, tmp_path):
        arr = 0.05 * np.sin(np.linspace(-np.pi, np.pi, 128, endpoint=False))
        raw = tmp_path / "datum.bin"
        arr.astype("<f8").tofile(raw)
        p = tmp_path / "ff.cfg"
        p.write_text(
            "grid.L = 3.141592653589793\ngrid.N = 128\nmodel.alpha = 2.0\n"
            f"stepper.t_end = 0.01\ndatum.kind = from_file\ndatum.path = {raw}\n"
        )
        out = tmp_path / "ffout"
        assert main(["run", "--config", str(p), "--out", str(out)]) == EXIT_OK
