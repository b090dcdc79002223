import json

import numpy as np
from click.testing import CliRunner

from opcert.cli import main
from opcert.wigner import read_binary


def _write_config(tmp_path, A=4.0, C=1.0, poly=None, normalize=True):
    cfg = {"gaussian": {"A": A, "C": C}, "normalize": normalize}
    if poly:
        cfg["poly"] = poly
    path = tmp_path / "kernel.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_certify_exit_zero_positive(tmp_path):
    cfg = _write_config(tmp_path, A=4, C=1, normalize=False)
    res = CliRunner().invoke(main, ["certify", cfg, "--depth", "8"])
    assert res.exit_code == 0, res.output
    assert "verdict: positive_up_to" in res.output


def test_certify_exit_one_non_positive(tmp_path):
    cfg = _write_config(tmp_path, A=1, C=4, normalize=False)
    res = CliRunner().invoke(main, ["certify", cfg, "--depth", "8"])
    assert res.exit_code == 1
    assert "witness: negative_ek" in res.output


def test_certify_writes_out_file(tmp_path):
    cfg = _write_config(tmp_path, A=4, C=1, normalize=False)
    out = tmp_path / "cert.txt"
    res = CliRunner().invoke(main, ["certify", cfg, "--out", str(out)])
    assert res.exit_code == 0
    assert out.read_text().startswith("opcert-certificate/1")


def test_certify_bad_config_exit_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    res = CliRunner().invoke(main, ["certify", str(path)])
    assert res.exit_code == 2
    missing = CliRunner().invoke(main, ["certify", str(tmp_path / "nope.json")])
    assert missing.exit_code == 2


def test_certify_invalid_values_exit_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"gaussian": {"A": -1.0, "C": 1.0}}))
    res = CliRunner().invoke(main, ["certify", str(path)])
    assert res.exit_code == 2


def test_sweep_writes_csv(tmp_path):
    cfg = _write_config(tmp_path, A=1.5, C=1.0,
                        poly={"alpha2": -1.0, "gamma0": 1.0})
    out = tmp_path / "sweep.csv"
    res = CliRunner().invoke(main, ["sweep", cfg, "--param", "gamma2",
                                    "--range", "0.5:1.5:3", "--depth", "6",
                                    "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# opcert-sweep/1")
    assert len(lines) == 5
    assert "H_6" in res.output


def test_sweep_bad_range_exit_two(tmp_path):
    cfg = _write_config(tmp_path)
    res = CliRunner().invoke(main, ["sweep", cfg, "--param", "gamma2",
                                    "--range", "oops"])
    assert res.exit_code == 2


def test_spectrum_prints_csv(tmp_path):
    cfg = _write_config(tmp_path, A=4, C=1)
    res = CliRunner().invoke(main, ["spectrum", cfg, "-n", "4"])
    assert res.exit_code == 0
    lines = res.output.splitlines()
    assert "eps0=0.66666666666666" in lines[0]
    assert lines[1] == "n,lambda"
    assert len(lines) == 6


def test_wigner_csv_to_file(tmp_path):
    cfg = _write_config(tmp_path, A=1, C=1)
    out = tmp_path / "w.csv"
    res = CliRunner().invoke(main, ["wigner", cfg, "--grid", "16:32",
                                    "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert out.read_text().startswith("# opcert-wigner/1")
    assert "integral=" in res.output


def test_wigner_binary_roundtrip(tmp_path):
    cfg = _write_config(tmp_path, A=1, C=1)
    out = tmp_path / "w.bin"
    res = CliRunner().invoke(main, ["wigner", cfg, "--grid", "16:32",
                                    "--format", "binary", "--out", str(out)])
    assert res.exit_code == 0, res.output
    with open(out, "rb") as fh:
        grid = read_binary(fh)
    assert grid.values.shape == (16, 32)
    assert np.isfinite(grid.values).all()


def test_wigner_binary_requires_out(tmp_path):
    cfg = _write_config(tmp_path, A=1, C=1)
    res = CliRunner().invoke(main, ["wigner", cfg, "--format", "binary"])
    assert res.exit_code == 2
