import csv
import filecmp
from pathlib import Path

import pytest

from hystwave.cli import ConfigError, main, parse_config

DEMOS = Path(__file__).resolve().parent.parent / "demos" / "configs"

SMALL = """
a = 1
n = 3
T_end = 2
checkpoints = 1, 2

[piece]
x_left = 0
x_right = 1
u = 0.5
"""


def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_config_sections_and_errors():
    cfg = parse_config("a = 1\n[piece]\nu = 0.5\n[piece]\nu = 0.25 # comment\n")
    assert cfg.get("a") == "1"
    assert [b["u"] for b in cfg.blocks("piece")] == ["0.5", "0.25"]
    with pytest.raises(ConfigError):
        parse_config("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        parse_config("just text\n")


def test_riemann_writes_fan_and_profile(tmp_path):
    out = tmp_path / "r"
    assert main(["riemann", "--config", str(DEMOS / "riemann_virgin.cfg"), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "fan.csv")))
    assert [r["kind"] for r in rows] == ["constant", "rarefaction", "constant"]
    assert float(rows[1]["slowness_lo"]) == pytest.approx(1 / 3)
    prof = list(csv.DictReader(open(out / "profile.csv")))
    assert len(prof) == 40


def test_riemann_identical_states_give_empty_fan(tmp_path):
    cfg = write(tmp_path, "u_left = 0.5\nu_right = 0.5\nleft_values = 0.5\nright_values = 0.5\n")
    assert main(["riemann", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert list(csv.DictReader(open(tmp_path / "o" / "fan.csv"))) == []


def test_incompatible_riemann_data_is_an_input_error(tmp_path, capsys):
    cfg = write(tmp_path, "u_left = 0.6\nu_right = 0\nleft_values = 0.5\n")
    assert main(["riemann", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_config_file_is_an_input_error(tmp_path):
    assert main(["cauchy", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2


def test_bad_pieces_are_input_errors(tmp_path):
    gap = SMALL + "\n[piece]\nx_left = 2\nx_right = 3\nu = 0\n"
    assert main(["cauchy", "--config", write(tmp_path, gap), "--out", str(tmp_path / "o")]) == 2
    assert main(["cauchy", "--config", write(tmp_path, "n = 3\n"), "--out", str(tmp_path / "o")]) == 2


def test_cauchy_is_deterministic(tmp_path):
    cfg = str(DEMOS / "bump.cfg")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["cauchy", "--config", cfg, "--n", "4", "--out", str(a)]) == 0
    assert main(["cauchy", "--config", cfg, "--n", "4", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert "fronts.csv" in names and "snapshot_t0.csv" in names and "snapshot_t4.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert mismatch == [] and errors == []


def test_verify_passes_on_config_and_on_saved_trajectory(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "v1")]) == 0
    assert main(["cauchy", "--config", cfg, "--out", str(tmp_path / "t")]) == 0
    assert main(["verify", "--trajectory", str(tmp_path / "t"), "--out", str(tmp_path / "v2")]) == 0
    report = {r["check"]: r for r in csv.DictReader(open(tmp_path / "v2" / "report.csv"))}
    assert report["rh_speed_error"]["status"] == "pass"
    assert report["energy_lhs_strict"]["status"] == "info"


def test_verify_without_inputs_is_an_input_error(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 2


def _edit_fronts(directory, edit):
    path = directory / "fronts.csv"
    rows = list(csv.reader(open(path)))
    edit(rows)
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def test_wrong_front_speed_fails_verification(tmp_path):
    cfg = write(tmp_path, SMALL)
    t = tmp_path / "t"
    assert main(["cauchy", "--config", cfg, "--out", str(t)]) == 0

    def slow_last_shock(rows):
        col = rows[0].index("speed")
        for r in reversed(rows[1:]):
            if r[1] == "u_shock":
                r[col] = "1/100"
                return

    _edit_fronts(t, slow_last_shock)
    assert main(["verify", "--trajectory", str(t), "--out", str(tmp_path / "v")]) == 1
    report = {r["check"]: r for r in csv.DictReader(open(tmp_path / "v" / "report.csv"))}
    assert report["rh_speed_error"]["status"] == "fail"


def test_corrupted_trajectory_is_an_input_error(tmp_path):
    cfg = write(tmp_path, SMALL)
    t = tmp_path / "t"
    assert main(["cauchy", "--config", cfg, "--out", str(t)]) == 0
    _edit_fronts(t, lambda rows: rows[1].__setitem__(rows[0].index("curve_left"), "garbage"))
    assert main(["verify", "--trajectory", str(t), "--out", str(tmp_path / "v")]) == 2


def test_event_cap_is_an_internal_guard(tmp_path, monkeypatch):
    monkeypatch.setenv("HYSTWAVE_EVENT_CAP", "0")
    assert main(["cauchy", "--config", str(DEMOS / "bump.cfg"), "--out", str(tmp_path)]) == 3


def test_oracle_command(tmp_path):
    cfg = write(tmp_path, "a = 1\nN = 50, 100\n[signal]\nvalues = 0.5, -0.25\n")
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "o" / "oracle.csv")))
    assert [r["N"] for r in rows] == ["50", "100"]
    assert all(float(r["max_abs_dw"]) <= float(r["w_bound"]) for r in rows)
    bad = write(tmp_path, "N = 1\n", "bad.cfg")
    assert main(["oracle", "--config", bad, "--out", str(tmp_path / "o")]) == 2
