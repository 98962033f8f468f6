import csv
import json
import logging
import subprocess
import sys

import pytest

from crowddtn.cli import CSV_COLUMNS, main, run_single, run_sweep
from crowddtn.metrics import METRIC_COLUMNS
from crowddtn.scenario import ScenarioConfig
from crowddtn.settings import SweepSpec

SMALL = """\
scenario.audience_count = 16
scenario.sim_duration = 10min
engine.generation_interval = 30
router.kind = SPRAY_FOCUS
router.copies_l = 8
"""


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text(SMALL)
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_row_and_trace(settings_file, tmp_path):
    out, trace = tmp_path / "row.csv", tmp_path / "trace.txt"
    assert main(["run", str(settings_file), "--out", str(out), "--trace", str(trace)]) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    assert tuple(rows[0]) == CSV_COLUMNS
    assert tuple(CSV_COLUMNS[-7:]) == METRIC_COLUMNS
    assert rows[0]["router_kind"] == "SPRAY_FOCUS"
    assert trace.read_text().startswith("0.0,CREATE,0,0,")


def test_run_to_stdout(settings_file, capsys):
    assert main(["run", str(settings_file)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 2


def test_baseline_row_has_seven_metric_columns(tmp_path):
    out = tmp_path / "row.csv"
    report = run_single(ScenarioConfig(sim_duration=600), out=str(out))
    row = read_rows(out)[0]
    assert [row[c] for c in METRIC_COLUMNS][0] == str(report.created)
    assert sum(c in row for c in METRIC_COLUMNS) == 7


def test_same_seed_is_byte_identical(settings_file, tmp_path):
    outputs = []
    for k in range(2):
        out, trace = tmp_path / f"row{k}.csv", tmp_path / f"trace{k}.txt"
        main(["run", str(settings_file), "--out", str(out), "--trace", str(trace)])
        outputs.append((out.read_bytes(), trace.read_bytes()))
    assert outputs[0] == outputs[1]


def test_isolated_artist_warns(tmp_path, caplog):
    path = tmp_path / "iso.txt"
    path.write_text(SMALL + "scenario.artist_position = 45, -10\n")
    out = tmp_path / "row.csv"
    with caplog.at_level(logging.WARNING):
        assert main(["run", str(path), "--out", str(out)]) == 0
    assert read_rows(out)[0]["delivery_probability"] == "0.0"
    assert any("no audience node" in r.getMessage() for r in caplog.records)


@pytest.mark.parametrize(
    "text",
    ["scenario.message_ttl = 0\n", "scenario.bogus = 1\n", "router.copies_l = lots\n"],
)
def test_config_errors_exit_1(tmp_path, capsys, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    assert main(["run", str(path)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_missing_settings_file_exits_1(tmp_path):
    assert main(["run", str(tmp_path / "nope.txt")]) == 1


def test_unwritable_output_exits_2(settings_file, tmp_path, capsys):
    target = tmp_path / "missing-dir" / "row.csv"
    assert main(["run", str(settings_file), "--out", str(target)]) == 2
    assert "missing-dir" in capsys.readouterr().err


def test_sweep_durations(settings_file, tmp_path):
    out = tmp_path / "sweep"
    code = main([
        "sweep", str(settings_file), "--axis", "scenario.sim_duration",
        "--values", "60,120,180,240,300", "--out", str(out),
    ])
    assert code == 0
    rows = read_rows(out / "results.csv")
    assert [r["sim_duration"] for r in rows] == ["60.0", "120.0", "180.0", "240.0", "300.0"]
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["axis"] == "scenario.sim_duration" and len(meta["runs"]) == 5


def test_sweep_densities(settings_file, tmp_path):
    base = ScenarioConfig(sim_duration=60)
    spec = SweepSpec("scenario.audience_count", ("100", "250", "500", "1000"), (0,), str(tmp_path / "d"))
    rows = run_sweep(base, spec)
    assert [r["audience_count"] for r in rows] == ["100", "250", "500", "1000"]


def test_sweep_copies_times_seeds(tmp_path):
    base = ScenarioConfig(audience_count=16, sim_duration=120, router_kind="SPRAY_WAIT")
    spec = SweepSpec("router.copies_l", ("10", "25", "50", "100"), (0, 1, 2, 3, 4), str(tmp_path / "c"))
    rows = run_sweep(base, spec)
    assert len(rows) == 20
    assert [(r["copies_l"], r["rng_seed"]) for r in rows[:6]] == [
        ("10", "0"), ("10", "1"), ("10", "2"), ("10", "3"), ("10", "4"), ("25", "0"),
    ]


def test_parallel_sweep_matches_serial(tmp_path):
    base = ScenarioConfig(audience_count=16, sim_duration=300, router_kind="PROPHETV2")
    values, seeds = ("10", "50"), (0, 1)
    serial = run_sweep(base, SweepSpec("router.aging_interval", values, seeds, str(tmp_path / "a")))
    parallel = run_sweep(base, SweepSpec("router.aging_interval", values, seeds, str(tmp_path / "b")), jobs=2)
    assert serial == parallel
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_sweep_bad_value_names_axis(settings_file, tmp_path, capsys):
    code = main([
        "sweep", str(settings_file), "--axis", "router.copies_l", "--values", "4,0", "--out", str(tmp_path / "x"),
    ])
    assert code == 1
    assert "router.copies_l" in capsys.readouterr().err


def test_sweep_without_axis_exits_1(settings_file, tmp_path):
    assert main(["sweep", str(settings_file), "--out", str(tmp_path / "x")]) == 1


def test_module_entry_point(settings_file):
    proc = subprocess.run(
        [sys.executable, "-m", "crowddtn", "run", str(settings_file)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("sweep_axis,sweep_value,router_kind")
