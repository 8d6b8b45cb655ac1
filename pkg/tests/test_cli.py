import json
import subprocess
import sys

import pytest

from igrlab import cli
from igrlab.config import ConfigError, parse_config


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0


def test_bad_arguments_are_validation_errors(capsys):
    assert cli.main([]) == 1
    assert cli.main(["run", "--bogus"]) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "igrlab", "opcheck", "--instances", "5"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "PASS" in out.stdout


def test_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("n_cells = 32\nt_end = 0.02\noutput_times = 0, 0.01, 0.02\n")
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "nc32_igr_t_0.010000.csv" in names and "nc32_igr_diagnostics.csv" in names
    assert "nc32_igr_t_0.020000.csv.meta.json" in names
    echo = parse_config((out / "config.txt").read_text())
    assert echo == parse_config(cfg.read_text())
    diag = (out / "nc32_igr_diagnostics.csv").read_text().splitlines()
    assert len(diag) == 4


def test_run_override_and_validation(tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["run", "--out", str(out), "--set", "n_cells=16", "--set", "t_end=0.005"]) == 0
    assert (out / "nc16_igr_t_0.005000.csv").exists()
    assert cli.main(["run", "--out", str(out), "--set", "nonsense=1"]) == 1
    assert "nonsense" in capsys.readouterr().err
    assert cli.main(["run", "--out", str(out), "--set", "n_cells"]) == 1
    assert cli.main(["run", str(tmp_path / "missing.txt")]) == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    # the non-dissipative HRE model loses positivity once its shocks steepen on a coarse grid
    code = cli.main(["run", "--out", str(tmp_path), "--set", "model=HRE", "--set", "n_cells=64",
                     "--set", "t_end=0.15"])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err
    assert (tmp_path / "nc64_hre_diagnostics.csv").exists()


def test_sweep_and_thread_bound(tmp_path, monkeypatch, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("n_cells = 64\nt_end = 0.005\n")
    b.write_text("n_cells = 64\nt_end = 0.005\nmodel = HIGR\n")
    monkeypatch.setenv("IGRLAB_THREADS", "2")
    assert cli.max_workers(8) == 2 and cli.max_workers(1) == 1
    assert cli.main(["run", str(a), str(b), "--out", str(tmp_path / "sweep")]) == 0
    assert (tmp_path / "sweep" / "a" / "nc64_igr_t_0.005000.csv").exists()
    assert (tmp_path / "sweep" / "b" / "nc64_higr_t_0.005000.csv").exists()
    monkeypatch.setenv("IGRLAB_THREADS", "zero")
    with pytest.raises(ConfigError):
        cli.max_workers(2)
    assert cli.main(["run", str(a), str(b), "--out", str(tmp_path / "s2")]) == 1
    monkeypatch.setenv("IGRLAB_THREADS", "0")
    with pytest.raises(ConfigError):
        cli.max_workers(2)
    monkeypatch.delenv("IGRLAB_THREADS")
    assert cli.max_workers(1) == 1


def test_dispersion_command(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = cli.main(["dispersion", "--model", "Euler", "--k-modes", "1", "--n-cells", "32",
                     "--t-measure", "0.25", "--out", str(out)])
    assert code == 0
    header, row = out.read_text().splitlines()
    assert header == "k,omega_analytic,speed_measured,rel_err"
    k, omega, speed, rel = map(float, row.split(","))
    assert omega == pytest.approx(k) and rel < 1e-3
    assert cli.main(["dispersion", "--k-modes", "0"]) == 1
    assert cli.main(["dispersion", "--k-modes", "1", "--n-cells", "16", "--amplitude", "0.1"]) == 1


def test_opcheck_and_compare(tmp_path, capsys):
    assert cli.main(["opcheck", "--instances", "10"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    out = tmp_path / "r"
    cli.main(["run", "--out", str(out), "--set", "n_cells=16", "--set", "t_end=0.01"])
    a, b = out / "nc16_igr_t_0.000000.csv", out / "nc16_igr_t_0.010000.csv"
    capsys.readouterr()
    assert cli.main(["compare", str(a), str(a), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["rho"]["Linf"] == 0.0
    assert cli.main(["compare", str(a), str(b)]) == 0
    assert "Linf" in capsys.readouterr().out
    assert cli.main(["compare", str(a), str(tmp_path / "nope.csv")]) == 1


def test_identical_configs_give_identical_csvs(tmp_path, capsys):
    args = ["--set", "n_cells=32", "--set", "t_end=0.01"]
    assert cli.main(["run", "--out", str(tmp_path / "a"), *args]) == 0
    assert cli.main(["run", "--out", str(tmp_path / "b"), *args]) == 0
    for name in ("nc32_igr_t_0.010000.csv", "nc32_igr_diagnostics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_echo_differs_only_in_override(tmp_path, capsys):
    base = ["--set", "n_cells=16", "--set", "t_end=0.005"]
    cli.main(["run", "--out", str(tmp_path / "a"), *base])
    cli.main(["run", "--out", str(tmp_path / "b"), *base, "--set", "cfl=0.5"])
    a = (tmp_path / "a" / "config.txt").read_text().splitlines()
    b = (tmp_path / "b" / "config.txt").read_text().splitlines()
    assert len(a) == len(b)
    assert [(x, y) for x, y in zip(a, b) if x != y] == [("cfl = 0.95", "cfl = 0.5")]
    meta = json.loads((tmp_path / "b" / "nc16_igr_t_0.005000.csv.meta.json").read_text())
    assert meta["config"]["cfl"] == 0.5 and meta["config"]["substeps"] == 3
