import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from nhtopo.cli import SweepAxis, main, parse_config
from nhtopo.errors import ConfigError


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_spectrum_dimer(capsys):
    code, out, _ = run_cli(["spectrum", "--model", "effective", "--t1", "0.8", "--L", "1"], capsys)
    assert code == 0
    r = rows(out)
    assert r[0] == ["index", "re", "im", "edge_mode_count"]
    assert sorted(float(x[1]) for x in r[1:]) == pytest.approx([-0.8, 0.8])


def test_spectrum_sweep_row_count(capsys):
    args = ["spectrum", "--model", "shape-nojump", "--gamma-l", "1.3333333333333333",
            "--L", "5", "--sweep", "t1:0.5:1.5:4"]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    r = rows(out)
    assert r[0][0] == "t1"
    assert len(r) == 1 + 4 * 40  # shape matrix is 8L x 8L


def test_two_axis_grid(capsys):
    args = ["spectrum", "--model", "effective", "--L", "2", "--sweep", "t1:0:1:3", "--sweep", "t2:1:2:2"]
    code, out, _ = run_cli(args, capsys)
    r = rows(out)
    assert r[0][:2] == ["t1", "t2"] and len(r) == 1 + 6 * 4
    # first axis outermost
    assert [x[0] for x in r[1::4]] == ["0", "0", "0.5", "0.5", "1", "1"]


def test_invariants_json(capsys):
    args = ["invariants", "--model", "shape-nojump", "--t1", "1.1519",
            "--gamma-l", "1.3333333333333333", "--format", "json"]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    pt = json.loads(out)["points"][0]
    assert pt["omega"] == 4 and pt["pole_orders"] == [0, 4] and pt["az_class"] == "CII"


def test_invariants_jump_csv(capsys):
    args = ["invariants", "--t1", "1.0", "--gamma-l", "1.3333333333333333"]
    code, out, _ = run_cli(args, capsys)
    r = rows(out)
    assert r[0] == ["omega", "P_plus", "P_minus", "nu_1-", "az_class"]
    assert float(r[1][3]) == pytest.approx(np.pi, abs=1e-6) and r[1][4] == "AII"


def test_gbz_rows(capsys):
    args = ["gbz", "--model", "effective", "--t1", "1.0", "--gamma-l", "1.3333333333333333", "--L", "20"]
    code, out, _ = run_cli(args, capsys)
    r = rows(out)
    assert code == 0 and r[0] == ["re_beta", "im_beta", "band_id", "source"]
    assert {x[3] for x in r[1:]} >= {"numerical", "agbz"}


def test_liouvillian_subcommand(capsys):
    args = ["liouvillian", "--t1", "1.0", "--gamma-l", "1.3333333333333333", "--L", "2", "--max-excitation", "2"]
    code, out, _ = run_cli(args, capsys)
    r = rows(out)
    assert code == 0 and r[0] == ["re", "im", "source"]
    assert sum(x[2] == "full" for x in r[1:]) == sum(x[2] == "nojump" for x in r[1:])


def test_symmetry_subcommand(capsys):
    code, out, _ = run_cli(["symmetry", "--model", "shape-nojump", "--gamma-l", "1.3", "--t1", "1.2"], capsys)
    r = rows(out)
    assert code == 0 and {x[-1] for x in r[1:]} == {"CII"}


def test_output_is_deterministic(tmp_path, capsys):
    args = ["invariants", "--model", "shape-nojump", "--gamma-l", "1.3333333333333333",
            "--sweep", "t1:0.5:1.5:3", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# example\nmodel = effective\nt1: 0.3\nsweep = t2:1:2:3\nL = 4\n")
    c = parse_config(["spectrum", "--config", str(cfg), "--t1", "0.9"])
    assert c.model == "effective" and c.t1 == 0.9 and c.cells == 4
    assert [p.t2 for p in c.points()] == [1.0, 1.5, 2.0]


def test_bad_value_exit_code(capsys):
    code, _, err = run_cli(["spectrum", "--t1", "abc"], capsys)
    assert code == 2 and "t1" in err


def test_kappa_out_of_range(capsys):
    code, _, err = run_cli(["invariants", "--kappa", "2"], capsys)
    assert code == 2


def test_numerical_failure_names_point(capsys):
    args = ["invariants", "--model", "shape-nojump", "--gamma-l", "1.3333333333333333", "--t1", "1.2018504251546631"]
    code, _, err = run_cli(args, capsys)
    assert code == 3 and "t1=1.20185" in err


def test_sweep_axis_parse():
    ax = SweepAxis.parse("gamma_l:0:1:5")
    assert ax.values() == pytest.approx(np.linspace(0, 1, 5))
    for bad in ("t1:0:1", "foo:0:1:3", "t1:0:1:0"):
        with pytest.raises(ConfigError):
            SweepAxis.parse(bad)


def test_console_script_and_threads(tmp_path):
    env = dict(os.environ, NHTOPO_THREADS="2")
    args = [sys.executable, "-m", "nhtopo.cli", "spectrum", "--model", "effective", "--L", "3",
            "--sweep", "t1:0:2:4"]
    a = subprocess.run(args, env=env, capture_output=True, text=True, check=True).stdout
    env["NHTOPO_THREADS"] = "1"
    b = subprocess.run(args, env=env, capture_output=True, text=True, check=True).stdout
    assert a == b and len(a.splitlines()) == 1 + 4 * 6
