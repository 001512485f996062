import json

import pytest

from blockprox.cli import main
from blockprox.trace import CSV_HEADER, read_trace_csv

BASE = ["--experiment", "exp1", "--d", "40", "--p", "12"]
SMALL = []


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module", autouse=True)
def shared_reference(tmp_path_factory):
    """Compute the small instance's reference once; every run below reuses it."""
    ref = tmp_path_factory.mktemp("ref") / "ref.npz"
    assert run("reference", *BASE, "--output", ref, "--quiet") == 0
    SMALL[:] = [*BASE, "--reference", str(ref)]
    yield ref
    SMALL.clear()


def test_run_to_file(tmp_path):
    out = tmp_path / "trace.csv"
    assert run("run", *SMALL, "--algorithm", "dr", "--alpha", "0.5", "--epochs", "20", "--output", out,
               "--quiet") == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    records = read_trace_csv(out)
    assert records[0].error_db == 0.0 and records[-1].epochs >= 20
    assert all(r.wall_ms == 0.0 for r in records)
    assert all(b.iteration > a.iteration and b.epochs >= a.epochs for a, b in zip(records, records[1:]))


def test_run_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run("run", *SMALL, "--algorithm", "ps", "--alpha", "0.5", "--epochs", "10", "--output", path,
                   "--quiet") == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_to_stdout(capsys):
    assert run("run", *SMALL, "--algorithm", "ps", "--epochs", "3", "--quiet") == 0
    assert capsys.readouterr().out.splitlines()[0] == CSV_HEADER


def test_run_both_with_plot(tmp_path):
    out, fig = tmp_path / "t.csv", tmp_path / "fig.svg"
    assert run("run", *SMALL, "--algorithm", "both", "--epochs", "5", "--output", out, "--plot", fig,
               "--quiet") == 0
    assert (tmp_path / "t_dr.csv").exists() and (tmp_path / "t_ps.csv").exists()
    assert fig.read_text().lstrip().startswith("<?xml")


def test_both_needs_output():
    assert run("run", *SMALL, "--algorithm", "both", "--epochs", "2", "--quiet") == 2


def test_compare(tmp_path):
    out = tmp_path / "cmp"
    args = ["compare", *SMALL, "--alphas", "0.5,1.0", "--seeds", "3", "--epochs", "5", "--output", out, "--quiet"]
    assert run(*args) == 0
    mean = (out / "mean.csv").read_text().splitlines()
    assert mean[0] == "algorithm,alpha,epochs,error_db"
    assert len(list(out.glob("dr_*.csv"))) == 6 and len(list(out.glob("ps_*.csv"))) == 6
    assert (out / "error.svg").exists()
    for path in out.glob("*_seed*.csv"):
        records = read_trace_csv(path)
        assert all(b.iteration > a.iteration and b.epochs >= a.epochs for a, b in zip(records, records[1:]))
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert run(*args) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_reference_round_trip(tmp_path, shared_reference):
    # a run that recomputes the reference matches one that loads it from disk
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("run", *SMALL, "--algorithm", "dr", "--epochs", "5", "--output", a, "--quiet") == 0
    assert run("run", *BASE, "--algorithm", "dr", "--epochs", "5", "--output", b, "--quiet") == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "exp1", "d": 40, "p": 12, "algorithm": "ps", "epochs": 4,
                               "alpha": 0.5, "reference": str(SMALL[-1])}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("run", "--config", cfg, "--output", a, "--quiet") == 0
    # m = 6 groups; iteration 0 of PS activates everything
    assert read_trace_csv(a)[2].activated_primal == 3
    assert run("run", "--config", cfg, "--alpha", "1.0", "--output", b, "--quiet") == 0
    assert read_trace_csv(b)[2].activated_primal == 6


def test_validate():
    assert run("validate", "--quiet") == 0


@pytest.mark.parametrize("args", [
    ["run", "--bogus"],
    ["run", "--algorithm", "dr", "--alpha", "1.5"],
    ["run", "--algorithm", "dr", "--lam", "2.0"],
    ["compare", "--gamma", "-1"],
    ["run", "--algorithm", "both"],
    ["frobnicate"],
])
def test_usage_errors(args):
    assert run(*args[:1], *SMALL, *args[1:]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run("run", "--config", cfg) == 2
