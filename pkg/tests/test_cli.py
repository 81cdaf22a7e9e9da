import subprocess
import sys

import numpy as np
import pytest

from stratmc.bench import CELL_COLUMNS, ORDER_COLUMNS, read_cells
from stratmc.cli import load_config, main
from stratmc.errors import ConfigurationError
from stratmc.sampling import verify_property_P, PointSet


def test_no_arguments(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert main(["price-european", "--bogus"]) == 2


def test_conflicting_sizes():
    assert main(["integrate", "--n", "4", "--N", "16"]) == 2


def test_bad_size_is_runtime_error(capsys):
    assert main(["integrate", "--sampler", "ss", "--N", "10", "--reps", "2"]) == 1
    assert "error" in capsys.readouterr().err


def test_price_european(capsys):
    assert main(["price-european", "--sampler", "ss", "--n", "8", "--reps", "5", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    for label in ("estimate", "sample variance", "oracle price", "absolute error"):
        assert label in out
    assert "17.34562291" in out


def test_price_asian_overrides(capsys, tmp_path):
    out_file = tmp_path / "reps.csv"
    assert main(["price-asian", "--sampler", "mc", "--N", "500", "--reps", "4", "--steps", "3",
                 "--strike", "95", "--rate-convention", "ln", "--out", str(out_file)]) == 0
    rows = read_cells(out_file)
    assert len(rows) == 4 and set(rows[0]) == {"rep", "estimate"}


def test_bench_writes_two_files(tmp_path, capsys):
    out = tmp_path / "r.csv"
    argv = ["bench", "--experiment", "european", "--schedule", "256,1024,4096", "--reps", "4",
            "--seed", "1", "--steps", "2", "--jobs", "1", "--out", str(out)]
    assert main(argv) == 0
    cells = out.read_text().splitlines()
    assert cells[0] == ",".join(CELL_COLUMNS) and len(cells) == 1 + 12
    orders = (tmp_path / "orders.csv").read_text().splitlines()
    assert orders[0] == ",".join(ORDER_COLUMNS) and len(orders) == 5


def test_bench_failed_cell_exit_code(tmp_path, capsys):
    argv = ["bench", "--schedule", "256,300", "--sampler", "ss", "--reps", "2", "--steps", "1", "--jobs", "1"]
    assert main(argv) == 1
    assert "error" in capsys.readouterr().out


def test_integrate_box(capsys):
    assert main(["integrate", "--domain", "box", "--box", "0.1:0.6,0.2:0.7", "--sampler", "lhs",
                 "--N", "50", "--reps", "20"]) == 0
    out = capsys.readouterr().out
    assert "0.25" in out and "LHS exact var" in out


def test_dump_points(tmp_path):
    path = tmp_path / "pts.csv"
    assert main(["dump-points", "--sampler", "ss", "--dim", "3", "--n", "4", "--seed", "9", "--out", str(path)]) == 0
    pts = np.loadtxt(path, delimiter=",", skiprows=1)
    assert pts.shape == (64, 3)
    assert verify_property_P(PointSet(pts, "ss", 4), 4)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nsampler = lhs\nn = 6\nreps = 3   # few\nseed=4\nsteps=2\n")
    assert main(["price-european", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "sampler=lhs" in out and "N=36" in out and "reps=3" in out
    # flags take precedence
    assert main(["price-european", "--config", str(cfg), "--reps", "2"]) == 0
    assert "reps=2" in capsys.readouterr().out


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    bad.write_text("reps = many\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    assert main(["integrate", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stratmc.cli"], capture_output=True, text=True)
    assert proc.returncode == 2
