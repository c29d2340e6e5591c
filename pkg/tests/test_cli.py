import csv
import io
from pathlib import Path

import pytest

from lorafair.cli import main
from lorafair.config import parse_config, parse_deployment
from lorafair.experiments import CSV_COLUMNS, PRESETS, ExperimentSpec, sweep, to_csv
from lorafair.simulation import ConfigError, Scenario

DATA = Path(__file__).parent / "data"
CFG = str(DATA / "small.cfg")


def test_ratios_command(capsys):
    assert main(["ratios", "--n", "50"]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = {int(line.split()[0]): line.split() for line in out[1:7]}
    assert rows[12][-1] == "1"
    assert [rows[sf][3] for sf in (12, 11, 10, 9, 8)] == ["0.0241", "0.0442", "0.0803", "0.1446", "0.2570"]
    assert out[-1].split()[-1] == "50"


def test_ratios_counts_sum(capsys):
    main(["ratios", "--n", "997", "--deployed", "7-12:125,7:250,8:500"])
    lines = capsys.readouterr().out.splitlines()
    assert sum(int(line.split()[-1]) for line in lines[1:-1]) == 997


def test_simulate_golden(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["simulate", "--config", CFG, "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text() == (DATA / "small_simulate.csv").read_text()


def test_sweep_golden(tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--config", CFG, "--axis", "n_nodes", "--values", "40,60", "--out", str(out)]
    assert main(args) == 0
    assert out.read_text() == (DATA / "small_sweep.csv").read_text()


def test_sweep_parallel_matches_serial(tmp_path):
    serial, parallel = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["sweep", "--config", CFG, "--axis", "radius", "--values", "300,900", "--seeds", "4,5"]
    main(common + ["--out", str(serial), "--workers", "1"])
    main(common + ["--out", str(parallel), "--workers", "2"])
    assert serial.read_bytes() == parallel.read_bytes()
    rows = list(csv.DictReader(io.StringIO(serial.read_text())))
    assert len(rows) == 2 * 3
    assert [r["sweep_value"] for r in rows] == ["300"] * 3 + ["900"] * 3


def test_simulate_writes_side_files(tmp_path):
    ev, nodes = tmp_path / "ev.csv", tmp_path / "nodes.csv"
    main(["simulate", "--config", CFG, "--seed", "1", "--out", str(tmp_path / "s.csv"), "--events", str(ev), "--nodes", str(nodes)])
    assert ev.read_text().startswith("time,node,sf,bw,tp,rx_power,outcome\n")
    assert len(nodes.read_text().splitlines()) == 61


def test_missing_config_leaves_no_output(tmp_path, capsys):
    out = tmp_path / "never.csv"
    assert main(["simulate", "--config", str(tmp_path / "absent.cfg"), "--seed", "1", "--out", str(out)]) != 0
    assert not out.exists()
    assert "cannot read config" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    ["n_nodes = 10\nbogus = 1\n", "n_nodes = ten\n", "n_nodes\n", "strategy = aloha\n", "cir = 1,2\n", "perfect_orthogonality = maybe\n"],
)
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("radius = -5\n")
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--axis", "n_nodes", "--values", "10", "--out", str(out)]) != 0
    assert not out.exists()


def test_config_keys():
    sc, extra = parse_config(
        "n_nodes = 12\nd0 = 50\ngamma = 2.5\nsensitivity_mode = table\ndeployed = lorawan-eu\n"
        "bw_weighting = squared\ncapture_enabled = no\nstrategies = sn5, reynders\n"
    )
    assert sc.n_nodes == 12 and sc.propagation.d0 == 50 and sc.propagation.gamma == 2.5
    assert sc.sensitivity.mode == "table" and not sc.capture_enabled
    assert (7, 250_000, 1) in sc.deployed
    assert extra == {"strategies": ("sn5", "reynders")}


def test_deployment_syntax():
    assert parse_deployment("7-9:125") == ((7, 125_000, 1), (8, 125_000, 1), (9, 125_000, 1))
    assert parse_deployment("12:125:4/8") == ((12, 125_000, 4),)
    with pytest.raises(ValueError):
        parse_deployment("7")


def test_experiment_spec_rows():
    spec = ExperimentSpec("t", Scenario(n_nodes=20, sim_time=60.0), "distribution", ("inner", "outer"), (1,), ("sn5", "equal-sf"))
    rows = sweep(spec, workers=1)
    assert len(rows) == 4
    assert list(csv.reader(io.StringIO(to_csv(rows))))[0] == list(CSV_COLUMNS)
    with pytest.raises(ConfigError):
        ExperimentSpec("t", Scenario(), "n_nodes", (), (1,))
    with pytest.raises(ConfigError):
        ExperimentSpec("t", Scenario(), "n_nodes", (10,), ())
    with pytest.raises(ConfigError):
        ExperimentSpec("t", Scenario(), "gamma", (2,), (1,))


def test_presets_cover_studies():
    assert set(PRESETS) == {"ideal-channel", "node-count", "distance", "radius", "skewed"}
    ideal = PRESETS["ideal-channel"].spec("ideal-channel")
    assert ideal.base.perfect_orthogonality and not ideal.base.capture_enabled
    assert PRESETS["radius"].values == (100, 200, 400, 800, 1600, 3200)
    for name, preset in PRESETS.items():
        spec = preset.spec(name, seeds=(1,))
        assert len(spec.points()) == len(preset.values) * max(len(preset.strategies), 1)


def test_workers_env(monkeypatch):
    from lorafair.experiments import default_workers

    monkeypatch.setenv("LORAFAIR_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("LORAFAIR_WORKERS", "zero")
    with pytest.raises(ConfigError):
        default_workers()
