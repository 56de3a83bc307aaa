"""Output-SNR estimators, compression gain and the gain-table experiment."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConfigError
from .receivers import RangeProfile
from .sar import ImageGrid, acquire, gbp_image

if TYPE_CHECKING:
    from .scenario import Scenario

log = logging.getLogger(__name__)

SATURATION_DB = 120.0
MIN_FLOOR_FRACTION = 0.25
CSV_HEADER = "snr_in_db,architecture,snr_out_db,gain_db,trials,std_db"


def analytic_gain_db(params) -> float:
    """Time-bandwidth product W*T in dB."""
    return 10.0 * math.log10(params.bandwidth_hz * params.duration_s)


def _ratio_db(peak_power: float, floor_power: float) -> float:
    if floor_power <= 0.0 or peak_power > floor_power * 10 ** (SATURATION_DB / 10):
        return SATURATION_DB
    if peak_power <= 0.0:
        return -SATURATION_DB
    return 10.0 * math.log10(peak_power / floor_power)


def snr_out_db(
    image: ImageGrid,
    true_target_xy: Sequence[float],
    exclusion_radius_m: float,
    peak_radius_m: float | None = None,
) -> float:
    """Peak-over-floor SNR of a point target in an image, in dB.

    Peak power is the largest squared pixel within ``peak_radius_m`` of the
    target (default a tenth of the exclusion radius; the nearest pixel if the
    disk holds none).  Floor power is the mean squared pixel outside the
    exclusion disk.  A numerically zero floor saturates at +120 dB.
    """
    if image.values is None:
        raise ConfigError("image has no pixel values")
    x0, y0 = true_target_xy
    if not (image.x_min <= x0 <= image.x_max and image.y_min <= y0 <= image.y_max):
        raise ConfigError(f"target {true_target_xy} lies outside the image grid")
    if peak_radius_m is None:
        peak_radius_m = exclusion_radius_m / 10.0
    if not exclusion_radius_m > 0 or not 0 < peak_radius_m <= exclusion_radius_m:
        raise ConfigError("need 0 < peak_radius_m <= exclusion_radius_m")

    xx, yy = image.mesh()
    d = np.hypot(xx - x0, yy - y0)
    power = np.asarray(image.values, dtype=float) ** 2
    floor_mask = d > exclusion_radius_m
    if floor_mask.mean() < MIN_FLOOR_FRACTION:
        raise ConfigError(
            f"exclusion radius {exclusion_radius_m:g} m leaves only "
            f"{100 * floor_mask.mean():.1f}% of pixels for the noise floor"
        )
    peak_mask = d <= peak_radius_m
    peak = power[peak_mask].max() if peak_mask.any() else power.flat[np.argmin(d)]
    return _ratio_db(float(peak), float(power[floor_mask].mean()))


def profile_snr_db(
    profile: RangeProfile,
    true_range_m: float,
    range_cell_m: float,
    exclusion_cells: float = 10.0,
    max_range_m: float | None = None,
) -> float:
    """Peak-over-floor SNR of a single range profile, in dB.

    Same estimator as ``snr_out_db`` in one dimension.  ``max_range_m`` caps
    the floor region so that profiles from different receivers are compared
    on a common range interval.
    """
    r = profile.range_axis_m
    power = np.abs(profile.values) ** 2
    d = np.abs(r - true_range_m)
    peak_mask = d <= range_cell_m
    floor_mask = d > exclusion_cells * range_cell_m
    if max_range_m is not None:
        floor_mask &= r < max_range_m
    if not floor_mask.any():
        raise ConfigError("no range bins left for the noise floor")
    peak = power[peak_mask].max() if peak_mask.any() else power[np.argmin(d)]
    return _ratio_db(float(peak), float(power[floor_mask].mean()))


def peak_location(image: ImageGrid) -> tuple[float, float]:
    """Center of the brightest pixel; ties go to the lowest row-major index."""
    if image.values is None or np.size(image.values) == 0:
        raise ConfigError("image has no pixel values")
    iy, ix = np.unravel_index(int(np.argmax(image.values)), np.shape(image.values))
    return float(image.x[ix]), float(image.y[iy])


@dataclass(frozen=True)
class GainRow:
    snr_in_db: float
    architecture: str
    snr_out_db: float
    compression_gain_db: float
    trials: int
    std_db: float

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.compression_gain_db != self.snr_out_db - self.snr_in_db:
            raise ValueError("compression gain must equal snr_out_db - snr_in_db")


@dataclass(frozen=True)
class GainReport:
    rows: tuple[GainRow, ...]

    def gain(self, snr_in_db: float, architecture: str) -> float:
        for row in self.rows:
            if row.snr_in_db == snr_in_db and row.architecture == architecture:
                return row.compression_gain_db
        raise KeyError((snr_in_db, architecture))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                f"{r.snr_in_db:.6g},{r.architecture},{r.snr_out_db:.6g},"
                f"{r.compression_gain_db:.6g},{r.trials},{r.std_db:.6g}\n"
            )
        return buf.getvalue()

    def format_table(self) -> str:
        """Rows = SNR_in, columns = architectures, cells = gain in dB."""
        snrs = list(dict.fromkeys(r.snr_in_db for r in self.rows))
        archs = list(dict.fromkeys(r.architecture for r in self.rows))
        width = max(12, *(len(a) + 2 for a in archs))
        lines = [f"{'SNR_in (dB)':>12}" + "".join(f"{a:>{width}}" for a in archs)]
        for s in snrs:
            cells = []
            for a in archs:
                try:
                    row = next(r for r in self.rows if r.snr_in_db == s and r.architecture == a)
                    cells.append(f"{row.compression_gain_db:>{width - 6}.1f} ±{row.std_db:<4.1f}")
                except StopIteration:
                    cells.append(f"{'-':>{width}}")
            lines.append(f"{s:>12g}" + "".join(cells))
        return "\n".join(lines) + "\n"


def trial_seed(seed: int, trial: int) -> int:
    """Deterministic per-trial seed derived from the master seed."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def measure_snr_out(scenario: "Scenario", architecture: str, snr_in_db: float | None, seed: int,
                    domain: str = "image", threads: int = 1) -> float:
    """One acquisition of the scenario's first target, measured in ``domain``."""
    if not scenario.scene.targets:
        raise ConfigError("output SNR needs at least one target in the scene")
    target = scenario.scene.targets[0]
    cell = scenario.chirp.range_cell_m
    profiles = acquire(
        scenario.scene, scenario.trajectory, architecture, scenario.chirp, scenario.adc,
        snr_in_db, seed, threads=threads,
    )
    if domain == "profile":
        r0 = target.distance_to(scenario.trajectory.positions[0])
        return profile_snr_db(
            profiles[0], r0, cell, scenario.exclusion_cells, scenario.adc.max_range_m(scenario.chirp)
        )
    image = gbp_image(profiles, scenario.trajectory, scenario.grid, threads=threads)
    return snr_out_db(image, (target.x_m, target.y_m), scenario.exclusion_cells * cell, cell)


def compression_gain_table(
    scenario: "Scenario",
    snr_list_db: Sequence[float] | None = None,
    architectures: Sequence[str] | None = None,
    trials: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> GainReport:
    """Monte-Carlo compression gain per (SNR_in, architecture).

    Each trial runs acquire -> backprojection -> ``snr_out_db`` (or the
    profile-level estimator when the scenario measures in the profile domain).
    Trial t uses ``trial_seed(seed, t)`` for every cell of the table, so
    architectures are compared on identical noise realizations.
    """
    snr_list_db = scenario.snr_list_db if snr_list_db is None else tuple(snr_list_db)
    architectures = scenario.architectures if architectures is None else tuple(architectures)
    trials = scenario.trials if trials is None else trials
    seed = scenario.seed if seed is None else seed
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    domain = scenario.measurement_domain
    rows = []
    for snr in snr_list_db:
        for arch in architectures:
            values = np.array([
                measure_snr_out(scenario, arch, snr, trial_seed(seed, t), domain, threads)
                for t in range(trials)
            ])
            mean = float(values.mean())
            std = float(values.std()) if trials > 1 else 0.0
            log.info("SNR_in %g dB, %s: snr_out %.2f dB (std %.2f)", snr, arch, mean, std)
            rows.append(GainRow(float(snr), arch, mean, mean - float(snr), trials, std))
    return GainReport(tuple(rows))
