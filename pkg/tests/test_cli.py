import math
import subprocess
import sys

import numpy as np
import pytest

from fmcw_sar_lab import ScenarioParseError, ScenarioValidationError
from fmcw_sar_lab.cli import read_pgm, run
from fmcw_sar_lab.scenario import bundled_scenarios, loads_scenario, parse_scenario, serialize_scenario

SMALL = """
[chirp]
bandwidth_hz = 1e8
duration_s = 1e-5

[adc]
high_rate_hz = 2e8
low_rate_hz = 2e7

[scene]
targets =
    3.0, -4.0
    -6.0, 5.0, 0.5

[trajectory]
radius_m = 30
n_positions = 12

[grid]
x_min_m = -20
x_max_m = 20
y_min_m = -15
y_max_m = 15
nx = 41
ny = 31

[experiment]
snr_db = 0, -10
architectures = proposed, stretch
trials = 2
seed = 3
"""


@pytest.fixture
def small_file(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def read_csv_rows(path):
    return [line.split(",") for line in path.read_text().splitlines()]


# --- scenarios ---------------------------------------------------------------

def test_bundled_paper_baseline():
    assert "paper_baseline" in bundled_scenarios()
    sc = parse_scenario("paper_baseline")
    assert sc.chirp.bandwidth_hz == 1e9
    assert sc.chirp.duration_s == 1e-5
    t = sc.scene.targets[0]
    assert (t.x_m, t.y_m) == (2.0, -2.0)
    assert sc.snr_list_db == (0.0, -10.0, -20.0, -30.0)
    assert sc.trials == 20


def test_empty_file_is_parse_error(tmp_path):
    p = tmp_path / "empty.ini"
    p.write_text("")
    with pytest.raises(ScenarioParseError):
        parse_scenario(p)
    assert run(["range-profile", "--scenario", str(p), "--out", str(tmp_path / "x.csv")]) == 2


def test_negative_duration_names_field(tmp_path, capsys):
    bad = SMALL.replace("duration_s = 1e-5", "duration_s = -1")
    with pytest.raises(ScenarioValidationError) as exc:
        loads_scenario(bad)
    assert exc.value.field == "chirp.duration_s"
    p = tmp_path / "bad.ini"
    p.write_text(bad)
    assert run(["image", "--scenario", str(p), "--out", str(tmp_path / "img")]) == 2
    assert "chirp.duration_s" in capsys.readouterr().err


@pytest.mark.parametrize(
    "edit, field",
    [
        (("n_positions = 12", "n_positions = 0"), "trajectory.n_positions"),
        (("architectures = proposed, stretch", "architectures = proposed, chirpz"), "experiment.architectures"),
        (("snr_db = 0, -10", "snr_db ="), "experiment.snr_db"),
        (("low_rate_hz = 2e7", "low_rate_hz = 3e7"), "adc.low_rate_hz"),
        (("low_rate_hz = 2e7", "low_rate_hz = 1e6"), "adc.low_rate_hz"),
    ],
)
def test_validation_errors_name_field(edit, field):
    with pytest.raises(ScenarioValidationError) as exc:
        loads_scenario(SMALL.replace(*edit))
    assert exc.value.field == field


def test_unknown_key_rejected():
    with pytest.raises(ScenarioValidationError) as exc:
        loads_scenario(SMALL.replace("[chirp]", "[chirp]\nbandwith_hz = 1"))
    assert exc.value.field == "chirp.bandwith_hz"


def test_missing_scenario_file_is_io_error(tmp_path):
    assert run(["image", "--scenario", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "img")]) == 3


@pytest.mark.parametrize("text", [SMALL, None])
def test_scenario_round_trip(text):
    sc = loads_scenario(text) if text else parse_scenario("paper_baseline")
    again = loads_scenario(serialize_scenario(sc))
    assert again == sc
    assert again.digest() == sc.digest()


def test_seed_precedence(small_file, tmp_path):
    out_a, out_b, out_c = (tmp_path / f"{n}.csv" for n in "abc")
    base = ["range-profile", "--scenario", str(small_file), "--snr-db", "-5"]
    assert run(base + ["--out", str(out_a)]) == 0
    assert run(base + ["--seed", "3", "--out", str(out_b)]) == 0
    assert run(base + ["--seed", "4", "--out", str(out_c)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert out_a.read_bytes() != out_c.read_bytes()


# --- range-profile -----------------------------------------------------------

def test_range_profile_paper_baseline_center(tmp_path):
    out = tmp_path / "rp.csv"
    assert run(["range-profile", "--scenario", "paper_baseline", "--position", "center", "--out", str(out)]) == 0
    rows = read_csv_rows(out)
    assert rows[0] == ["range_m", "real", "imag", "magnitude"]
    data = np.array(rows[1:], dtype=float)
    peak = data[np.argmax(data[:, 3]), 0]
    assert abs(peak - 2 * math.sqrt(2)) <= 0.15


def test_range_profile_position_zero_matches_geometry(tmp_path):
    out = tmp_path / "rp.csv"
    assert run(["range-profile", "--scenario", "paper_baseline", "--out", str(out)]) == 0
    data = np.array(read_csv_rows(out)[1:], dtype=float)
    expected = math.hypot(10 - 2, 0 + 2)  # position 0 sits at (10, 0)
    assert abs(data[np.argmax(data[:, 3]), 0] - expected) <= 0.15


def test_range_profile_missing_directory(tmp_path):
    out = tmp_path / "no" / "such" / "dir.csv"
    assert run(["range-profile", "--scenario", "paper_baseline", "--out", str(out)]) == 3


def test_range_profile_bad_position(small_file, tmp_path):
    out = str(tmp_path / "x.csv")
    assert run(["range-profile", "--scenario", str(small_file), "--position", "99", "--out", out]) == 2
    assert run(["range-profile", "--scenario", str(small_file), "--position", "north", "--out", out]) == 2


def test_unknown_architecture_is_usage_error(small_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["image", "--scenario", str(small_file), "--architecture", "fancy", "--out", str(tmp_path / "i")])
    assert exc.value.code == 2


# --- image -------------------------------------------------------------------

def test_image_outputs(small_file, tmp_path):
    prefix = tmp_path / "img"
    assert run(["image", "--scenario", str(small_file), "--out", str(prefix)]) == 0
    rows = read_csv_rows(tmp_path / "img.csv")
    assert len(rows) == 31 and all(len(r) == 41 for r in rows)
    grid = np.array(rows, dtype=float)
    pgm = read_pgm(tmp_path / "img.pgm")
    assert pgm.shape == (31, 41) and pgm.dtype == np.dtype(">u2")
    assert pgm.max() == 65535 and pgm.min() == 0
    assert np.unravel_index(np.argmax(pgm), pgm.shape) == np.unravel_index(np.argmax(grid), grid.shape)
    meta = dict(line.split(" = ", 1) for line in (tmp_path / "img.meta.txt").read_text().splitlines())
    assert meta["seed"] == "3"
    assert meta["row_order"] == "y_descending"
    assert (meta["nx"], meta["ny"]) == ("41", "31")
    assert meta["scenario_hash"] == loads_scenario(SMALL).digest()
    assert float(meta["y_max_m"]) == 15.0


def test_image_pgm_header(small_file, tmp_path):
    assert run(["image", "--scenario", str(small_file), "--out", str(tmp_path / "img")]) == 0
    data = (tmp_path / "img.pgm").read_bytes()
    assert data.startswith(b"P5\n41 31\n65535\n")
    assert len(data) == len(b"P5\n41 31\n65535\n") + 2 * 41 * 31


def _argmax_xy(pgm, meta):
    iy, ix = np.unravel_index(np.argmax(pgm), pgm.shape)
    ny, nx = pgm.shape
    x = np.linspace(float(meta["x_min_m"]), float(meta["x_max_m"]), nx)[ix]
    y = np.linspace(float(meta["y_max_m"]), float(meta["y_min_m"]), ny)[iy]  # north-up rows
    return x, y


def _meta(path):
    return dict(line.split(" = ", 1) for line in path.read_text().splitlines())


def test_image_paper_baseline_noisy_localizes(tmp_path):
    prefix = tmp_path / "pb"
    assert run(["image", "--scenario", "paper_baseline", "--snr-db", "-10", "--out", str(prefix),
                "--threads", "4"]) == 0
    x, y = _argmax_xy(read_pgm(tmp_path / "pb.pgm"), _meta(tmp_path / "pb.meta.txt"))
    assert math.hypot(x - 2, y + 2) <= 0.15


def test_image_noise_free_architectures_agree(small_file, tmp_path):
    peaks = []
    for arch in ("stretch", "proposed"):
        prefix = tmp_path / arch
        assert run(["image", "--scenario", str(small_file), "--architecture", arch, "--out", str(prefix)]) == 0
        peaks.append(_argmax_xy(read_pgm(tmp_path / f"{arch}.pgm"), _meta(tmp_path / f"{arch}.meta.txt")))
    assert math.dist(*peaks) <= 1.5


# --- gain-table --------------------------------------------------------------

def test_gain_table_outputs(small_file, tmp_path, capsys):
    out = tmp_path / "gain.csv"
    assert run(["gain-table", "--scenario", str(small_file), "--out", str(out)]) == 0
    rows = read_csv_rows(out)
    assert rows[0] == ["snr_in_db", "architecture", "snr_out_db", "gain_db", "trials", "std_db"]
    assert [r[:2] for r in rows[1:]] == [["0", "proposed"], ["0", "stretch"], ["-10", "proposed"], ["-10", "stretch"]]
    printed = capsys.readouterr().out
    assert "SNR_in" in printed and "proposed" in printed


def test_gain_table_single_trial_std_zero(small_file, tmp_path):
    sc = small_file.read_text().replace("trials = 2", "trials = 1")
    small_file.write_text(sc)
    out = tmp_path / "gain.csv"
    assert run(["gain-table", "--scenario", str(small_file), "--out", str(out)]) == 0
    assert all(float(r[5]) == 0.0 for r in read_csv_rows(out)[1:])


# --- determinism -------------------------------------------------------------

@pytest.mark.parametrize(
    "command, extra, suffixes",
    [
        ("range-profile", ["--snr-db", "-10", "--architecture", "stretch"], [""]),
        ("image", ["--snr-db", "-10"], [".csv", ".pgm", ".meta.txt"]),
        ("gain-table", [], [""]),
    ],
)
def test_byte_identical_reruns(small_file, tmp_path, command, extra, suffixes):
    outputs = []
    for i, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"run{i}"
        assert run([command, "--scenario", str(small_file), "--out", str(out), "--threads", threads] + extra) == 0
        outputs.append([(tmp_path / f"run{i}{s}").read_bytes() for s in suffixes])
    assert outputs[0] == outputs[1] == outputs[2]


def test_console_entry_point(tmp_path):
    out = tmp_path / "rp.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "fmcw_sar_lab", "range-profile", "--scenario", "paper_baseline", "--out", str(out)],
        capture_output=True, text=True, env={"FMCW_SAR_LOG": "info", "PATH": ""},
    )
    assert proc.returncode == 0, proc.stderr
    assert "peak at" in proc.stderr
    assert out.exists()
