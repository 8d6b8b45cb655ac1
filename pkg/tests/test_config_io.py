import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from igrlab.config import Config, ConfigError, load_config, parse_config
from igrlab.dg1d import Mesh1D
from igrlab.diagnostics import DiagnosticsRecord, record
from igrlab.io import (
    CsvFormatError, SNAPSHOT_COLUMNS, compare_csv, read_snapshot, write_diagnostics, write_snapshot,
)
from igrlab.models import ModelKind, ModelParams, initial_condition_sod


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg == Config()
    assert cfg.model is ModelKind.IGR and cfg.n_cells == 512
    assert cfg.alpha == pytest.approx(5 / 512**2, rel=1e-15)
    assert cfg.output_times == (0.0, 0.125, 0.25, 0.375, 0.5)


def test_parse_values_and_comments():
    cfg = parse_config("model = HIGR  # comment\n\nn_cells=64\npressureless = yes\noutput_times = 0.1, 0.0")
    assert cfg.model is ModelKind.HIGR and cfg.n_cells == 64 and cfg.pressureless
    assert cfg.output_times == (0.0, 0.1)
    assert cfg.model_params().alpha == pytest.approx(5 / 64**2)


def test_t_end_trims_default_outputs():
    assert parse_config("t_end = 0.2").output_times == (0.0, 0.125, 0.2)


@pytest.mark.parametrize("text,key,line", [
    ("n_cells = 64\nbogus = 1", "bogus", 2),
    ("cfl = 0.5\ncfl = 0.6", "cfl", 2),
    ("\n\nn_cells = many", "n_cells", 3),
    ("cfl = 2.0", "cfl", 1),
    ("model = LAD", "model", 1),
    ("t_end = 0.1\noutput_times = 0.2", "output_times", 2),
])
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key and err.value.line == line
    assert key in str(err.value) and f"line {line}" in str(err.value)


def test_malformed_line():
    with pytest.raises(ConfigError) as err:
        parse_config("n_cells 64")
    assert err.value.line == 1


@given(
    n=st.integers(4, 4096), g=st.floats(1.01, 3.0), a=st.floats(0.0, 50.0),
    cfl=st.floats(0.01, 1.0), kind=st.sampled_from(list(ModelKind)),
)
def test_config_text_round_trip(n, g, a, cfl, kind):
    cfg = parse_config(f"n_cells = {n}\ngamma = {g!r}\nalpha_coefficient = {a!r}\ncfl = {cfl!r}\nmodel = {kind.value}")
    again = parse_config(cfg.to_text())
    assert again == cfg and again.alpha == cfg.alpha


def test_load_config(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("n_cells = 32\n")
    assert load_config(p).n_cells == 32


@pytest.fixture
def snapshot(tmp_path):
    m = Mesh1D(32)
    model = ModelParams.default_for("IGR", m)
    s = initial_condition_sod(m, model)
    s.time = 0.125
    path = write_snapshot(s, model, tmp_path / "a.csv", parse_config("n_cells = 32"))
    return path, s, model


def test_snapshot_round_trip_is_exact(snapshot):
    from igrlab.io import snapshot_columns
    path, s, model = snapshot
    data = read_snapshot(path)
    cols = snapshot_columns(s, model)
    for c in SNAPSHOT_COLUMNS:
        assert np.array_equal(data[c], cols[c])
    assert path.read_text().splitlines()[0] == "x,rho,u,E,eps"
    meta = json.loads((path.parent / "a.csv.meta.json").read_text())
    assert meta["time"] == 0.125 and meta["n_cells"] == 32 and meta["model"] == "IGR"
    assert meta["config"]["n_cells"] == 32 and meta["version"]


def test_compare_self_and_shift(snapshot, tmp_path):
    path, _, _ = snapshot
    zero = compare_csv(path, path)
    assert all(v == 0.0 for norms in zero.values() for v in norms.values())
    data = read_snapshot(path)
    shifted = tmp_path / "b.csv"
    rows = [",".join(SNAPSHOT_COLUMNS)]
    rolled = {c: (data[c] if c == "x" else np.roll(data[c], 1)) for c in SNAPSHOT_COLUMNS}
    for i in range(len(data["x"])):
        rows.append(",".join(format(rolled[c][i], ".17g") for c in SNAPSHOT_COLUMNS))
    shifted.write_text("\n".join(rows) + "\n")
    rep = compare_csv(path, shifted)
    jump = np.max(np.abs(np.roll(data["rho"], 1) - data["rho"]))
    assert rep["rho"]["Linf"] == pytest.approx(jump)
    assert rep["rho"]["L1"] <= rep["rho"]["L2"] <= rep["rho"]["Linf"]


def test_compare_rejects_bad_files(snapshot, tmp_path):
    path, _, _ = snapshot
    bad = tmp_path / "bad.csv"
    bad.write_text("x,rho\n0,1\n")
    with pytest.raises(CsvFormatError):
        compare_csv(path, bad)
    other = tmp_path / "other.csv"
    data = read_snapshot(path)
    lines = [",".join(SNAPSHOT_COLUMNS)] + [
        ",".join(repr(float(data[c][i] + (0.5 if c == "x" else 0))) for c in SNAPSHOT_COLUMNS)
        for i in range(len(data["x"]))]
    other.write_text("\n".join(lines) + "\n")
    with pytest.raises(CsvFormatError):
        compare_csv(path, other)


def test_write_diagnostics(tmp_path):
    m = Mesh1D(16)
    model = ModelParams.default_for("IGR", m)
    r = record(initial_condition_sod(m, model), model)
    p = write_diagnostics([r, r], tmp_path / "d.csv")
    lines = p.read_text().splitlines()
    assert lines[0].split(",") == DiagnosticsRecord.columns() and len(lines) == 3
    assert float(lines[1].split(",")[1]) == r.total_mass
