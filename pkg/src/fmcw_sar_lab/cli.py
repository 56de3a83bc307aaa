"""``fmcw-sar-lab`` command-line front end.

Exit codes: 0 success, 1 internal error, 2 config/parse error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, InvalidParameterError
from .metrics import compression_gain_table
from .receivers import ARCHITECTURES, range_profile
from .sar import acquire, gbp_image
from .scenario import Scenario, parse_scenario
from .signal_core import add_awgn, scene_echo

log = logging.getLogger("fmcw_sar_lab")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("FMCW_SAR_LOG", "warn").strip().lower(), logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("fmcw_sar_lab")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {parent}")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_range_profile(scenario: Scenario, architecture: str, out_path: Path,
                      snr_in_db: float | None = None, position: str = "0") -> int:
    """One chirp from a trajectory position (or the trajectory center) to CSV."""
    _check_writable(out_path)
    if position == "center":
        radar = scenario.trajectory.center
        index = 0
    else:
        try:
            index = int(position)
        except ValueError:
            raise ConfigError(f"--position must be an integer index or 'center', got {position!r}") from None
        if not 0 <= index < scenario.trajectory.n_positions:
            raise ConfigError(f"position {index} outside trajectory of {scenario.trajectory.n_positions}")
        radar = tuple(scenario.trajectory.positions[index])
    params, adc = scenario.chirp, scenario.adc
    rx = scene_echo(scenario.scene, radar, params, adc.high_rate_hz, adc.max_delay_s(params))
    if snr_in_db is not None:
        rx = add_awgn(rx, snr_in_db, seed=(scenario.seed, index),
                      reference_power=params.amplitude**2, noise_bandwidth_hz=params.bandwidth_hz)
    profile = range_profile(rx, architecture, params, adc)
    lines = ["range_m,real,imag,magnitude"]
    for r, v in zip(profile.range_axis_m, profile.values):
        lines.append(f"{r:.10g},{v.real:.10g},{v.imag:.10g},{abs(v):.10g}")
    _write_text(out_path, "\n".join(lines) + "\n")
    log.info("peak at %.4f m (%s)", profile.peak_range_m, architecture)
    return EXIT_OK


def write_pgm(path: Path, values: np.ndarray) -> tuple[float, float]:
    """16-bit binary PGM (P5, maxval 65535, big-endian), min-max normalized.

    ``values`` is written top row first.  Returns the (min, max) used.
    """
    lo, hi = float(values.min()), float(values.max())
    scaled = np.zeros(values.shape) if hi <= lo else (values - lo) / (hi - lo)
    pixels = np.rint(scaled * 65535).astype(">u2")
    ny, nx = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())
    return lo, hi


def read_pgm(path: Path) -> np.ndarray:
    """Inverse of ``write_pgm`` for files written by it."""
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos].decode("ascii"))
    pos += 1
    if fields[0] != "P5":
        raise ValueError("not a binary PGM")
    nx, ny, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos:], dtype=dtype, count=nx * ny).reshape(ny, nx)


def cmd_image(scenario: Scenario, architecture: str, snr_in_db: float | None, out_prefix: Path,
              threads: int = 1) -> int:
    """Acquire, backproject and write ``<prefix>.csv``, ``<prefix>.pgm``, ``<prefix>.meta.txt``.

    Both the CSV and the PGM are written north-up: row 0 is y_max.
    """
    _check_writable(out_prefix)
    profiles = acquire(scenario.scene, scenario.trajectory, architecture, scenario.chirp,
                       scenario.adc, snr_in_db, scenario.seed, threads=threads)
    image = gbp_image(profiles, scenario.trajectory, scenario.grid, threads=threads)
    top_down = np.asarray(image.values)[::-1]

    csv_path = Path(f"{out_prefix}.csv")
    _write_text(csv_path, "\n".join(",".join(f"{v:.10g}" for v in row) for row in top_down) + "\n")
    lo, hi = write_pgm(Path(f"{out_prefix}.pgm"), top_down)
    g = scenario.grid
    meta = {
        "architecture": architecture,
        "snr_in_db": "none" if snr_in_db is None else f"{snr_in_db:g}",
        "seed": scenario.seed,
        "scenario_hash": scenario.digest(),
        "n_positions": scenario.trajectory.n_positions,
        "x_min_m": repr(g.x_min),
        "x_max_m": repr(g.x_max),
        "y_min_m": repr(g.y_min),
        "y_max_m": repr(g.y_max),
        "nx": g.nx,
        "ny": g.ny,
        "row_order": "y_descending",
        "pgm_min": f"{lo:.10g}",
        "pgm_max": f"{hi:.10g}",
    }
    _write_text(Path(f"{out_prefix}.meta.txt"), "".join(f"{k} = {v}\n" for k, v in meta.items()))
    return EXIT_OK


def cmd_gain_table(scenario: Scenario, out_path: Path, threads: int = 1, stream=None) -> int:
    _check_writable(out_path)
    report = compression_gain_table(scenario, threads=threads)
    _write_text(out_path, report.to_csv())
    print("Compression gain (dB, mean ± std over %d trials)" % scenario.trials, file=stream or sys.stdout)
    print(report.format_table(), end="", file=stream or sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmcw-sar-lab",
        description="Compare stretch, matched-filter and reconstruction-based FMCW receivers with SAR imaging.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("range-profile", "single-chirp range profile to CSV"),
        ("image", "backprojected image to CSV + PGM + metadata"),
        ("gain-table", "Monte-Carlo compression-gain table to CSV"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--scenario", required=True, help="scenario file or bundled name (e.g. paper_baseline)")
        p.add_argument("--out", required=True, type=Path, help="output file (image: path prefix)")
        p.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
        if name != "gain-table":
            p.add_argument("--architecture", choices=ARCHITECTURES, default="proposed")
            p.add_argument("--snr-db", type=float, default=None, help="input SNR; omit for noise-free")
        if name == "range-profile":
            p.add_argument("--position", default="0", help="trajectory index, or 'center'")
    return parser


def run(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.scenario)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            scenario = scenario.with_overrides(seed=args.seed)
        threads = max(1, args.threads)
        if args.command == "range-profile":
            return cmd_range_profile(scenario, args.architecture, args.out, args.snr_db, args.position)
        if args.command == "image":
            return cmd_image(scenario, args.architecture, args.snr_db, args.out, threads)
        return cmd_gain_table(scenario, args.out, threads)
    except (ConfigError, InvalidParameterError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
