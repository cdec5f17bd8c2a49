import csv
import json

import numpy as np
import pytest

from pertdecomp import cli
from pertdecomp.cli import PRESETS, main, parse_config, run
from pertdecomp.errors import ParseError, ValidationError

CHAIN_CURVE = """\
experiment: chain-curve
n_sites: 6
J: 1.0
g: 0.2
h: 0.3
t_min: 0.0
t_max: 1.0
t_steps: 100
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_minimal_config_parses():
    cfg = parse_config(CHAIN_CURVE)
    assert cfg.experiment == "chain-curve"
    grid = cfg.t_grid()
    assert len(grid) == 100 and grid[0] == pytest.approx(0.01) and grid[-1] == 1.0


def test_odd_chain_rejected():
    with pytest.raises(ValidationError, match="even"):
        parse_config(CHAIN_CURVE.replace("n_sites: 6", "n_sites: 7"))


def test_uniform_and_per_site_are_exclusive():
    with pytest.raises(ValidationError, match="g_sites"):
        parse_config(CHAIN_CURVE + "g_sites: [0.2, 0.2, 0.2, 0.2, 0.2, 0.2]\n")


def test_per_site_array_accepted():
    text = CHAIN_CURVE.replace("g: 0.2\n", "g_sites: [0.1, 0.2, 0.3, 0.1, 0.2, 0.3]\n")
    spec = parse_config(text).chain_spec()
    assert list(spec.g) == [0.1, 0.2, 0.3, 0.1, 0.2, 0.3]


def test_unknown_key_rejected():
    with pytest.raises(ParseError, match="colour"):
        parse_config(CHAIN_CURVE + "colour: blue\n")


def test_syntax_error_reports_line():
    with pytest.raises(ParseError, match="line"):
        parse_config("experiment: chain-curve\nJ: [1, 2\n")


@pytest.mark.parametrize(
    "patch",
    ["t_min: -1.0", "t_max: 0.0", "t_steps: 1", "format: xml", "reference: nested-pert", "experiment: bogus"],
)
def test_invariants_enforced(patch):
    key = patch.split(":")[0]
    lines = [ln for ln in CHAIN_CURVE.splitlines() if not ln.startswith(key + ":")]
    with pytest.raises(ValidationError):
        parse_config("\n".join(lines + [patch]))


def test_config_overrides_preset():
    cfg = parse_config("t_steps: 20\n", preset="fig2")
    assert cfg.experiment == "chain-curve" and cfg.g == 1.0 and cfg.t_steps == 20


def test_chain_curve_files(tmp_path):
    cfg = parse_config(CHAIN_CURVE.replace("t_steps: 100", "t_steps: 10"))
    paths = run(cfg, tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["chain-curve.meta.json", "curve.csv"]
    rows = read_csv(tmp_path / "curve.csv")
    assert rows[0] == ["t", "fidelity_trotter2", "fidelity_nested_unit", "fidelity_nested_pert"]
    assert len(rows) == 11
    values = np.array(rows[1:], dtype=float)
    assert np.all(np.isfinite(values)) and np.all(values[:, 1:] <= 1 + 1e-12)
    meta = json.loads((tmp_path / "chain-curve.meta.json").read_text())
    assert meta["config"]["n_sites"] == 6
    assert meta["tolerances"]["pole_guard"] == 1e-3
    assert "version" in meta
    assert not list(tmp_path.glob(".staging-*"))


def test_csv_uses_full_precision(tmp_path):
    run(parse_config(CHAIN_CURVE.replace("t_steps: 100", "t_steps: 3")), tmp_path)
    text = (tmp_path / "curve.csv").read_text()
    assert "\r" not in text
    value = text.splitlines()[1].split(",")[1]
    assert float(f"{float(value):.17g}") == float(value)
    assert len(value.replace("0.", "").lstrip("0")) >= 15


def test_json_mirrors_csv(tmp_path):
    base = CHAIN_CURVE.replace("t_steps: 100", "t_steps: 4")
    run(parse_config(base), tmp_path / "a")
    run(parse_config(base + "format: json\n"), tmp_path / "b")
    csv_rows = np.array(read_csv(tmp_path / "a" / "curve.csv")[1:], dtype=float)
    data = json.loads((tmp_path / "b" / "curve.json").read_text())
    json_rows = np.array([[r[c] for c in data["columns"]] for r in data["rows"]])
    assert np.array_equal(csv_rows, json_rows)


def test_pole_points_dropped_and_logged(tmp_path):
    # grid is pi/4, pi/2, 3pi/4, pi: g*t or J*t is an odd multiple of pi/2 at all but pi
    text = CHAIN_CURVE.replace("g: 0.2", "g: 2.0").replace("t_steps: 100", "t_steps: 4")
    text = text.replace("t_max: 1.0", "t_max: 3.14159265358979")
    run(parse_config(text), tmp_path)
    meta = json.loads((tmp_path / "chain-curve.meta.json").read_text())
    (event,) = meta["pole_guard_events"]
    assert event["dropped_t"] == pytest.approx([np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    rows = read_csv(tmp_path / "curve.csv")
    assert len(rows) == 1 + 1


def test_count_experiment(tmp_path):
    run(parse_config("experiment: count\nn_sites: 6\n"), tmp_path)
    rows = read_csv(tmp_path / "count.csv")
    assert rows == [
        ["scheme", "count", "ratio_vs_trotter2"],
        ["trotter2", "24", "1"],
        ["nested-unit", "81", "3.375"],
        ["nested-pert", "81", "3.375"],
    ]


def test_two_qubit_experiment(tmp_path):
    text = "experiment: two-qubit\nn_sites: 2\nJ: 1.0\ng: 0.2\nh: 0.3\nalpha: 0.1\nt_max: 1.0\nt_steps: 5\n"
    run(parse_config(text), tmp_path)
    rows = read_csv(tmp_path / "two_qubit_curve.csv")
    assert rows[0] == ["t", "fidelity_trotter2", "fidelity_perturbative"]
    assert len(rows) == 6


def test_window_and_sweep_files(tmp_path):
    base = "n_sites: 6\nJ: 1.0\nh: 0.3\naxis: g\nvalues: [0.2, 2.0]\nt_max: 1.0\nt_steps: 100\n"
    run(parse_config("experiment: window\n" + base), tmp_path)
    run(parse_config("experiment: sweep\n" + base), tmp_path)
    window = read_csv(tmp_path / "window.csv")
    assert window[0] == ["g", "h", "t_lo", "t_hi"]
    assert {float(r[0]) for r in window[1:]} == {0.2}
    sweep = read_csv(tmp_path / "sweep.csv")
    assert sweep[0] == ["axis_value", "max_improvement", "baseline_time",
                        "fidelity_at_baseline", "error_reduction"]
    assert [float(r[0]) for r in sweep[1:]] == [0.2, 2.0]


def test_failed_sweep_points_go_to_metadata(tmp_path):
    text = "experiment: sweep\nn_sites: 4\nJ: 1.0\ng: 0.2\naxis: h\nvalues: [0.0, 0.3]\nt_max: 1.0\nt_steps: 50\n"
    run(parse_config(text), tmp_path)
    meta = json.loads((tmp_path / "sweep.meta.json").read_text())
    assert meta["failed_points"][0]["axis_value"] == 0.0
    assert len(read_csv(tmp_path / "sweep.csv")) == 2


def test_failure_leaves_no_partial_output(tmp_path, monkeypatch):
    def explode(*args, **kwargs):
        raise FloatingPointError("boom")

    monkeypatch.setitem(cli.RUNNERS, "count", explode)
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: count\n")
    assert main(["run", "--preset", "fig1", "--out", str(tmp_path)]) == 0
    before = sorted(p.name for p in tmp_path.iterdir())
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_NUMERIC
    assert sorted(p.name for p in tmp_path.iterdir()) == before


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: chain-curve\nn_sites: 7\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "ValidationError" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == cli.EXIT_CONFIG
    assert main(["run"]) == cli.EXIT_CONFIG


def test_pole_exit_code(tmp_path, monkeypatch):
    from pertdecomp.errors import NearPole

    def pole(*args, **kwargs):
        raise NearPole(1.5708)

    monkeypatch.setitem(cli.RUNNERS, "count", pole)
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: count\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_POLE


def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    for name in PRESETS:
        assert name in out


def test_fig1_preset_crossover(tmp_path):
    assert main(["run", "--preset", "fig1", "--out", str(tmp_path)]) == 0
    rows = np.array(read_csv(tmp_path / "single_qubit_curve.csv")[1:], dtype=float)
    t, trot, pert = rows.T
    assert np.all(pert[t > 0.3] > trot[t > 0.3])
    assert abs(pert[0] - trot[0]) < 1e-12
    meta = json.loads((tmp_path / "single-qubit.meta.json").read_text())
    assert meta["preset"] == "fig1" and "alpha" in meta["config"]["notes"]


def test_fig5_preset_window_table(tmp_path):
    assert main(["run", "--preset", "fig5", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "window.csv")[1:]
    gs = sorted({float(r[0]) for r in rows})
    assert 0.2 in gs and 2.0 not in gs
