import json

import numpy as np
import pytest

from fastslow.cli import build_parser, load_config, main, run_pipeline
from fastslow.core import read_profile_csv
from fastslow.errors import ConfigError

YEQ = np.sqrt(3.0) - 1.0

FAST_CONFIG = {
    "nodes": 51,
    "mesh_points_per_axis": 10,
    "redim1d_points": 41,
    "redim2d_points": [21, 21],
    "fasttime_x0": 0.8,
}


def _write_config(tmp_path, extra=None):
    cfg = dict(FAST_CONFIG)
    cfg.update(extra or {})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ("model", "equilibrium", "gql", "pde-solve", "redim", "fast-time", "pipeline"):
        assert name in out


def test_model_subcommand(capsys):
    assert main(["model"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["name"] == "michaelis-menten"
    assert info["dimension"] == 3
    assert info["params"]["delta"] == 0.01


def test_equilibrium_subcommand(capsys):
    assert main(["equilibrium", "--guess", "1,0.5,0.5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["state"] == pytest.approx([0.0, YEQ, YEQ], abs=1e-10)
    assert out["residual_sup"] < 1e-12


def test_gql_subcommand_writes_report(tmp_path, capsys):
    report_path = tmp_path / "gql_report.json"
    assert main(["gql", "--out-report", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["n_f"] == 1
    assert 0.0 < report["epsilon"] < 0.1
    assert len(report["T"]) == 9 and len(report["Z"]) == 9


def test_unknown_config_key_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"nodes": 51, "frobnicate": 1}))
    assert main(["model", "--config", str(path)]) == 2
    assert "frobnicate" in capsys.readouterr().err


def test_load_config_defaults_match_study():
    cfg = load_config(None)
    assert cfg.nodes == 101
    assert cfg.steady_tol == 1e-8
    assert cfg.min_gap_ratio == 10.0
    assert cfg.redim2d_points == (61, 61)
    assert cfg.fasttime_start == (2.0, 0.0, 1.0)


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_pde_solve_roundtrip(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "profile.csv"
    hist = tmp_path / "history.csv"
    assert main(["pde-solve", "--config", cfg, "--out", str(out),
                 "--history", str(hist)]) == 0
    profile = read_profile_csv(out)
    assert profile.grid.node_count == 51
    assert profile.states[-1] == pytest.approx([2.0, 0.0, 1.0])
    first = out.read_text().splitlines()
    assert first[0].startswith("#") and "michaelis-menten" in first[0]
    assert first[1] == "x,X,Y,Z"
    assert hist.read_text().splitlines()[1] == "t,residual"


def test_redim_subcommand_constant_gradient(tmp_path):
    cfg = _write_config(tmp_path)
    out = tmp_path / "redim1d.csv"
    assert main(["redim", "--config", cfg, "--dim", "1",
                 "--grad", "const:2.0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "theta,X,Y,Z"
    assert len(lines) == 2 + FAST_CONFIG["redim1d_points"]


def test_fast_time_subcommand(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "fasttime.csv"
    assert main(["fast-time", "--config", cfg, "--mode", "ode",
                 "--start", "2,0,1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "epsilon,K,dist,t_enter,bound,ratio"
    row = [float(v) for v in lines[2].split(",")]
    assert row[5] <= 1.0  # ratio


def test_pde_solve_non_convergence_exits_3(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"steady_tol": 0.0, "max_time": 0.1})
    out = tmp_path / "profile.csv"
    assert main(["pde-solve", "--config", cfg, "--out", str(out)]) == 3
    assert "stationary" in capsys.readouterr().err


def test_pipeline_stops_at_gql_on_impossible_gap(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"min_gap_ratio": 1e6})
    code = main(["pipeline", "--config", cfg, "--out-dir", str(tmp_path / "out")])
    assert code == 4
    err = capsys.readouterr().err
    assert "gql" in err
    assert not (tmp_path / "out" / "gql_report.json").exists()


def test_pipeline_artifacts_and_determinism(tmp_path):
    cfg_path = _write_config(tmp_path)
    from fastslow.cli import load_config as lc
    config = lc(cfg_path)
    paths_a = run_pipeline(config, str(tmp_path / "a"))
    paths_b = run_pipeline(config, str(tmp_path / "b"))
    expected = {"gql_report", "slow_manifold", "stationary_profile",
                "redim1d", "redim2d", "fasttime"}
    assert set(paths_a) == expected
    for name in sorted(expected):
        with open(paths_a[name], "rb") as fa, open(paths_b[name], "rb") as fb:
            assert fa.read() == fb.read(), f"{name} differs between runs"
    # artifacts parse back
    profile = read_profile_csv(paths_a["stationary_profile"])
    assert profile.grid.node_count == 51
    report = json.loads(open(paths_a["gql_report"]).read())
    assert report["n_f"] == 1
    rows = [l for l in open(paths_a["fasttime"]).read().splitlines()
            if not l.startswith("#")]
    assert rows[0] == "epsilon,K,dist,t_enter,bound,ratio"
    assert len(rows) == 3  # header + ode row + pde row


def test_env_var_out_dir(tmp_path, monkeypatch, capsys):
    cfg = _write_config(tmp_path, {"min_gap_ratio": 1e6})
    monkeypatch.setenv("FASTSLOW_OUT", str(tmp_path / "envout"))
    code = main(["pipeline", "--config", cfg])
    assert code == 4  # fails at gql but respected the env dir for creation
    assert (tmp_path / "envout").is_dir()


def test_parser_version():
    parser = build_parser()
    with pytest.raises(SystemExit) as exc:
        parser.parse_args(["--version"])
    assert exc.value.code == 0
