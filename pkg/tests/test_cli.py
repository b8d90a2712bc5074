import csv
import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from sigmadamp import cli, solver

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

REFERENCE_INI = """\
[problem]
sigma = 1.0
sigma1 = 0.25
sigma2 = 0.75
n = 2
"""


def write(tmp_path, text, name="case.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


def test_rates_command(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["rates", "--config", str(CONFIGS / "reference_rates.ini"), "--out", str(out)]) == 0
    rep = report(out)
    assert rep["verdict"] == "pass"
    assert rep["results"]["linear"]["exact"] == "-1/3"
    assert rep["results"]["semilinear"]["D^{2σ2} u"]["exact"] == "-4/3"


def test_unknown_key_is_rejected_with_line(tmp_path, capsys):
    path = write(tmp_path, REFERENCE_INI + "sigma3 = 0.5\n")
    assert cli.main(["rates", "--config", path, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "unknown key 'sigma3'" in err and ":6:" in err


def test_duplicate_and_bad_values(tmp_path):
    with pytest.raises(cli.UsageError, match="line|:"):
        cli.parse_config(write(tmp_path, REFERENCE_INI + "[query]\ns = abc\n"), "rates")
    with pytest.raises(cli.UsageError, match="unknown section"):
        cli.parse_config(write(tmp_path, REFERENCE_INI + "[extras]\nx = 1\n"), "rates")


def test_flat_file_and_aliases(tmp_path):
    path = write(tmp_path, "sigma = 1\nsigma1 = 0.25\nsigma2 = 0.75\ndim_n = 2\nnonlinearity_p = 3\n")
    spec = cli.parse_config(path, "rates")
    assert spec.config.dim_n == 2 and spec.config.nonlinearity_p == 3.0


def test_invalid_parameters_exit_2(tmp_path, capsys):
    path = write(tmp_path, REFERENCE_INI.replace("sigma1 = 0.25", "sigma1 = 0.6"))
    assert cli.main(["rates", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert "sigma1 < sigma/2 violated" in capsys.readouterr().err


def test_semilinear_without_exponent(tmp_path, capsys):
    text = REFERENCE_INI + "[grid]\ngrid_points = 32\nbox_length = 64\ndt = 0.5\nhorizon = 10\n"
    path = write(tmp_path, text)
    assert cli.main(["simulate-semilinear", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert "nonlinearity_p required" in capsys.readouterr().err


def test_missing_config_and_bad_command(tmp_path):
    assert cli.main(["rates", "--config", str(tmp_path / "none.ini"), "--out", str(tmp_path)]) == 2
    assert cli.main(["bogus", "--config", "x", "--out", "y"]) == 2


def test_verify_decay_outputs(tmp_path):
    out = tmp_path / "out"
    args = ["verify-decay", "--config", str(CONFIGS / "reference_decay.ini"), "--out", str(out),
            "--t-min", "100", "--t-max", "10000"]
    assert cli.main(args) == 0
    with open(out / "samples.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "value", "predicted_curve"]
    assert len(rows) == 10
    first = report(out)
    assert cli.main(args) == 0
    second = report(out)
    first.pop("metadata")
    second.pop("metadata")
    assert first == second


def test_tight_tolerance_fails(tmp_path):
    args = ["verify-decay", "--config", str(CONFIGS / "reference_decay.ini"),
            "--out", str(tmp_path / "o"), "--t-min", "100", "--t-max", "10000",
            "--tolerance", "1e-6"]
    assert cli.main(args) == 1
    # the slope misses by more than 1e-6 on the faster side: not a failure, but not a pass
    assert report(tmp_path / "o")["verdict"] in ("fail", "faster-than-predicted")


def test_blowup_exit_code(tmp_path, capsys):
    out = tmp_path / "out"
    args = ["simulate-semilinear", "--config", str(CONFIGS / "semilinear_blowup.ini"),
            "--out", str(out), "--grid", "32"]
    assert cli.main(args) == 3
    rep = report(out)
    assert rep["verdict"] == "blowup"
    assert rep["results"]["blowup"].startswith("blow-up at t=")
    assert "blow-up" in capsys.readouterr().err


def test_small_semilinear_run_writes_trajectory(tmp_path):
    text = REFERENCE_INI + "p = 3\n[grid]\ngrid_points = 32\nbox_length = 64\ndt = 0.5\nhorizon = 100\n" \
        "[times]\nt_min = 1\nt_max = 100\n"
    out = tmp_path / "out"
    code = cli.main(["simulate-semilinear", "--config", write(tmp_path, text), "--out", str(out)])
    assert code in (0, 1)
    records = cli.read_trajectory(out / "trajectory.bin")
    assert len(records) == 9
    box, time, coeffs = records[-1]
    assert box == 64.0 and time == pytest.approx(100.0) and coeffs.shape == (32, 32)


def test_trajectory_roundtrip(tmp_path):
    grid = solver.GridSpec(2, 8, 4.0)
    rng = np.random.default_rng(1)
    fields = [solver.SpectralField(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)), grid, t)
              for t in (0.0, 1.5)]
    cli.write_trajectory(tmp_path / "t.bin", fields)
    back = cli.read_trajectory(tmp_path / "t.bin")
    assert [b[1] for b in back] == [0.0, 1.5]
    np.testing.assert_array_equal(back[1][2], fields[1].coefficients)
    (tmp_path / "bad.bin").write_bytes(b"XXXX")
    with pytest.raises(ValueError, match="bad magic"):
        cli.read_trajectory(tmp_path / "bad.bin")


def test_rates_for_energy_estimate(tmp_path):
    path = write(tmp_path, REFERENCE_INI + "[query]\nkind = L2L2\n")
    out = tmp_path / "o"
    assert cli.main(["rates", "--config", path, "--out", str(out)]) == 0
    assert report(out)["results"]["linear"]["exact"] == "1"


def test_kernel_norms_command(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["kernel-norms", "--config", str(CONFIGS / "kernel_norms.ini"),
                     "--out", str(out)]) == 0
    assert report(out)["results"]["sharpness"]["verdict"] == "pass"
