import json

import numpy as np
import pytest

from dimple_bec import cli
from dimple_bec.config import ConfigError, Grid, RunConfig, parse_config_text
from dimple_bec.figures import FigureDataset, Pipeline, PipelineError
from dimple_bec.plotting import RenderError, render

FAST = ["--m1", "32", "--m2", "64"]


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_command(capsys):
    code, out, _ = run_cli(["spectrum", "--lambda", "0", "--z1", "0", "--levels", "3"], capsys)
    assert code == 0
    assert out.strip() == "0,1,2"


def test_fig1_header_and_grid(tmp_path, capsys):
    code, out, _ = run_cli(["fig", "1", "--out-dir", str(tmp_path), *FAST], capsys)
    assert code == 0
    raw = (tmp_path / "fig1.csv").read_bytes()
    assert raw.startswith(b"z1,tc_kelvin,tc_over_tc0\n")
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 82
    assert lines[1].split(",")[0] == "0" and lines[-1].split(",")[0] == "8"
    meta = json.loads((tmp_path / "fig1.json").read_text())
    assert len(meta["config_digest"]) == 16
    assert "fig1.csv" in out


def test_csv_twelve_significant_digits():
    ds = FigureDataset(1, ("a", "b"), [[1 / 3, -0.0], [2e-7, 123456789012345.0]],
                       {"config_digest": "x"})
    assert ds.to_csv() == "a,b\n0.333333333333,0\n2e-07,1.23456789012e+14\n"


def test_dataset_requires_digest_and_shape():
    with pytest.raises(ValueError):
        FigureDataset(1, ("a",), [[1.0]], {})
    with pytest.raises(ValueError):
        FigureDataset(1, ("a", "b"), [[1.0]], {"config_digest": "x"})


def test_all_twice_is_deterministic(tmp_path, capsys):
    args = ["all", "--out-dir", str(tmp_path), "--format", "csv+svg", *FAST]
    assert run_cli(args, capsys)[0] == 0
    first = {p.name: p.read_bytes() for p in tmp_path.glob("fig*.*")}
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    assert {p.name: p.read_bytes() for p in tmp_path.glob("fig*.*")} == first
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["fresh_root_solves"] == 0
    assert sorted(manifest["artifacts"]) == [f"fig{i}.csv" for i in range(1, 6)]
    assert "fresh_root_solves=0" in out
    assert len([ln for ln in out.splitlines() if ln.startswith("wrote")]) == 16


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# trap\nn = 500\nlambda=0\nlevels = 4\nm1=4\nm2=8\n")
    code, out, _ = run_cli(["spectrum", "--config", str(cfg)], capsys)
    assert code == 0 and out.strip() == "0,1,2,3"
    code, out, _ = run_cli(["spectrum", "--config", str(cfg), "--levels", "2"], capsys)
    assert out.strip() == "0,1"


def test_config_errors_report_path_and_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 100\nthis line is wrong\n")
    code, _, err = run_cli(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2
    assert f"{cfg}:2" in err
    cfg.write_text("colour = blue\n")
    code, _, err = run_cli(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2 and "unknown key" in err
    code, _, err = run_cli(["spectrum", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2 and "missing.cfg" in err


def test_parse_config_values():
    out = parse_config_text("omega-hz = 30\nformat = csv+svg\nmass_amu=87", "x")
    assert out == {"omega_hz": 30.0, "fmt": "csv+svg", "mass_amu": 87.0}
    with pytest.raises(ConfigError, match="x:1"):
        parse_config_text("n = many", "x")


def test_runtime_errors_exit_nonzero(capsys):
    code, _, err = run_cli(["mu", "--lambda", "1", *FAST], capsys)
    assert code == 2 and "temperature" in err
    code, _, err = run_cli(["spectrum", "--levels", "0"], capsys)
    assert code == 2


def test_point_commands(capsys, tmp_path):
    base = ["--out-dir", str(tmp_path), *FAST]
    code, out, _ = run_cli(["tc", *base], capsys)
    assert code == 0 and out.startswith("tc_kelvin=")
    code, out, _ = run_cli(["fraction", "--t-over-tc0", "0.02", *base], capsys)
    frac = float(out.split("fraction=")[1])
    assert frac > 0.999
    code, out, _ = run_cli(["mu", "--temperature", "1e-7", *base], capsys)
    assert code == 0 and "mu_over_hbar_omega=" in out
    code, out, _ = run_cli(["density", "--lambda", "3.6", "--z1", "1", *base], capsys)
    assert code == 0
    lines = (tmp_path / "density.csv").read_text().splitlines()
    assert lines[0] == "z,rho" and len(lines) == 1202


def test_grid_values():
    assert len(Grid(0.0, 8.0, 0.1)) == 81
    assert len(Grid(0.02, 1.5, 0.02)) == 75
    g = Grid(-6.0, 6.0, 0.01).values()
    assert len(g) == 1201 and g[100] == -5.0 and g[600] == 0.0
    with pytest.raises(ConfigError):
        Grid(1.0, 0.0, 0.1)


def test_digest_tracks_physics_only(tmp_path):
    a = RunConfig()
    assert a.digest() == RunConfig(out_dir=tmp_path, fmt="csv+svg").digest()
    assert a.digest() != RunConfig(lam=3.2).digest()
    assert a.trap.omega == pytest.approx(2 * np.pi * 21.0)


def test_render_rejects_mixed_digests(tmp_path):
    a = FigureDataset(3, ("t", "f"), [[0.1, 1.0], [0.2, 0.9]], {"config_digest": "aaa"})
    b = FigureDataset(3, ("t", "f"), [[0.1, 1.0], [0.2, 0.8]], {"config_digest": "bbb"})
    with pytest.raises(RenderError):
        render([a, b], tmp_path / "x.svg")
    path = render([a], tmp_path / "x.svg")
    assert path.read_text().lstrip().startswith("<?xml")


def test_pipeline_attaches_position_to_errors(tmp_path, monkeypatch):
    from dimple_bec import figures

    def boom(*a, **k):
        raise figures.SpectrumError("no sign change")

    pipe = Pipeline(RunConfig(m1=8, m2=8, cache_dir=tmp_path))
    monkeypatch.setattr(pipe.cache, "get", boom)
    with pytest.raises(PipelineError, match="z1=0.0"):
        pipe.fig1()
