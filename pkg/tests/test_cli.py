import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ratelens import cli
from ratelens.matrix_io import read_matrix_csv, write_matrix_csv
from ratelens.probcore import Alphabet

# a small apoptosis model keeps solver-backed commands fast
SMALL = ["--x-max", "40", "--x-th", "12", "--unit-scale", "10"]


def run(*args):
    return cli.main([str(a) for a in args])


def test_rd_curve_default_grid(tmp_path):
    out = tmp_path / "c.csv"
    assert run("rd-curve", "--distortion", "squared", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda,rate_bits,distortion,iterations,converged"
    assert len(lines) == 61
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["distortion"] == "squared" and len(side["lambda_grid"]) == 60


def test_rd_curve_zero_lambda(tmp_path):
    out = tmp_path / "c.csv"
    assert run("rd-curve", "--lambda-grid", "0", "--out", out) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 1 and rows[0].split(",")[1] == "0"


def test_missing_out_is_usage_error(capsys):
    assert run("rd-curve") == 2
    assert "usage" in capsys.readouterr().err


def test_strict_non_convergence(tmp_path):
    out = tmp_path / "c.csv"
    args = ["rd-curve", *SMALL, "--lambda-grid", "2", "--max-iter", "1", "--out", out]
    assert run(*args) == 0
    assert run(*args, "--strict") == 3
    assert run("rd-strategy", *SMALL, "--lambda", "2", "--max-iter", "1", "--strict",
               "--out", out) == 3


def test_rd_strategy(tmp_path):
    out = tmp_path / "s.csv"
    assert run("rd-strategy", *SMALL, "--target-d", "0.05", "--out", out) == 0
    q, xa, ya = read_matrix_csv(out)
    assert q.shape == (40, 2) and np.allclose(q.sum(axis=1), 1)
    side = json.loads(out.with_suffix(".json").read_text())
    assert abs(side["distortion"] - 0.05) <= 1e-6
    assert run("rd-strategy", *SMALL, "--out", out) == 2
    assert run("rd-strategy", *SMALL, "--target-d", "5", "--out", out) == 2


def test_file_model(tmp_path):
    d, p = tmp_path / "d.csv", tmp_path / "p.csv"
    xa = Alphabet(("lo", "hi"))
    write_matrix_csv(d, [[0, 1], [1, 0]], xa, Alphabet((0, 1)))
    write_matrix_csv(p, [[1, 1]], Alphabet(("p",)), xa)
    out = tmp_path / "s.csv"
    assert run("rd-strategy", "--model", "file", "--distortion-file", d, "--source-file", p,
               "--lambda", str(np.log(9)), "--out", out) == 0
    q, _, _ = read_matrix_csv(out)
    assert np.allclose(q, [[0.9, 0.1], [0.1, 0.9]])
    assert run("rd-strategy", "--model", "file", "--lambda", "1", "--out", out) == 2


def test_ibaa(tmp_path):
    counts, out = tmp_path / "n.csv", tmp_path / "d.csv"
    write_matrix_csv(counts, [[10, 0, 4], [2, 7, 0]], Alphabet.range(2), Alphabet.range(3))
    assert run("ibaa", "--counts", counts, "--out", out) == 0
    d, _, _ = read_matrix_csv(out)
    assert np.all(np.isfinite(d)) and np.all(d.min(axis=1) == 0)
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["lambda_assumed"] == 1.0 and side["row_counts"] == [14, 9]


def test_ibaa_bad_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x\\y,0,1\n0,1,-2\n")
    assert run("ibaa", "--counts", bad, "--out", tmp_path / "o.csv") == 2
    assert "negative" in capsys.readouterr().err
    bad.write_text("")
    assert run("ibaa", "--counts", bad, "--out", tmp_path / "o.csv") == 2
    assert "empty matrix" in capsys.readouterr().err
    assert run("ibaa", "--counts", tmp_path / "missing.csv", "--out", tmp_path / "o.csv") == 2


def test_sim_legi_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sim-legi", "--hill", "1", "--trials", "1000", "--seed", "7"]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b, "--threads", "3") == 0
    assert a.read_bytes() == b.read_bytes()
    side = json.loads(a.with_suffix(".json").read_text())
    assert side["seed"] == 7 and side["mode"] == "sample" and side["params"]["a"] == 220.0


def test_sim_legi_seed_drawn_and_printed(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert run("sim-legi", "--trials", "10", "--n-sectors", "4", "--out", out) == 0
    err = capsys.readouterr().err
    seed = json.loads(out.with_suffix(".json").read_text())["seed"]
    assert f"seed: {seed}" in err
    assert "100%" in err


def test_sim_legi_invalid_params(tmp_path, capsys):
    assert run("sim-legi", "--a", "30", "--b", "20", "--out", tmp_path / "x.csv") == 2
    assert "positive" in capsys.readouterr().err


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "nope")
    assert run("sim-legi", "--trials", "10", "--seed", "1", "--out", tmp_path / "x.csv") == 2
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert run("sim-legi", "--trials", "10", "--seed", "1", "--out", tmp_path / "x.csv") == 0


def test_sim_apoptosis(tmp_path):
    out = tmp_path / "n.csv"
    args = ["sim-apoptosis", *SMALL, "--lambda", "2", "--samples", "5000", "--seed", "3"]
    assert run(*args, "--out", out) == 0
    c, _, _ = read_matrix_csv(out)
    assert c.sum() == 5000
    first = out.read_bytes()
    assert run(*args, "--out", out) == 0 and out.read_bytes() == first


def test_align(tmp_path):
    d, out = tmp_path / "d.csv", tmp_path / "a.csv"
    lab = Alphabet((0, 1, 2, 3))
    write_matrix_csv(d, 1 - np.eye(4), lab, lab)
    assert run("align", "--distortion-file", d, "--per-row", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("shift_radians,mean_distortion,theta_s=0")
    assert lines[3].split(",")[1] == "0"
    write_matrix_csv(d, np.zeros((2, 3)), Alphabet.range(2), Alphabet.range(3))
    assert run("align", "--distortion-file", d, "--out", out) == 2


def test_hill_sweep(tmp_path):
    out_dir = tmp_path / "sweep"
    assert run("hill-sweep", "--hills", "1,3", "--trials", "2000", "--n-sectors", "8",
               "--seed", "5", "--mode", "accumulate", "--out-dir", out_dir) == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert [s["hill"] for s in summary] == [1, 3]
    assert (out_dir / "profile_h3.csv").exists() and (out_dir / "profile_h3.json").exists()


def test_roundtrip(tmp_path, capsys):
    assert run("roundtrip", "--distortion", "hamming", "--lambda", "3.44") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_abs_error"] <= 1e-6
    out = tmp_path / "r.json"
    assert run("roundtrip", *SMALL, "--distortion", "squared", "--lambda", "2.93",
               "--out", out) == 0
    assert json.loads(out.read_text())["max_abs_error"] <= 1e-6
    assert run("roundtrip", "--lambda", "-1") == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "c.csv"
    cfg.write_text(f"# curve settings\nlambda-grid = 0.5, 1\nx_max = 40\nx_th = 12\n"
                   f"unit_scale = 10\nout = {out}\n")
    assert run("rd-curve", "--config", cfg) == 0
    assert len(out.read_text().splitlines()) == 3
    assert run("rd-curve", "--config", cfg, "--lambda-grid", "1") == 0
    assert len(out.read_text().splitlines()) == 2
    cfg.write_text("bogus_key = 1\n")
    assert run("rd-curve", "--config", cfg, "--out", out) == 2
    cfg.write_text("distortion = cubic\n")
    assert run("rd-curve", "--config", cfg, "--out", out) == 2
    assert run("rd-curve", "--config", tmp_path / "nope.cfg", "--out", out) == 2


def test_no_subcommand_and_version(capsys):
    assert run() == 2
    assert run("--version") == 0
    assert cli.__version__ in capsys.readouterr().out


tokens = st.one_of(
    st.sampled_from(sorted(cli.COMMANDS) + [
        "--out", "--lambda", "--lambda-grid", "--trials", "--seed", "--threads", "--config",
        "--hill", "--a", "--b", "--distortion", "--model", "--strict", "--target-d", "-1",
        "0", "nan", "inf", "1e400", "hamming", "x.csv", "--hills", "",
    ]),
    st.text(max_size=12),
)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(tokens, max_size=8))
def test_parsing_is_total(tmp_path, monkeypatch, argv):
    # Replace the command bodies so only parsing and validation are exercised.
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr(cli, "COMMANDS", {k: (lambda ns: 0) for k in cli.COMMANDS})
    assert cli.main(argv) in (0, 2, 3)
