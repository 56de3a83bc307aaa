"""Chirp waveforms, point-target echoes and calibrated complex noise.

Everything is complex baseband with no carrier.  The transmit chirp is

    s_t(t) = A * exp(j*pi*k*t**2),   0 <= t < T,   k = W / T

and a scatterer at delay tau returns ``reflectivity * s_t(t - tau)`` sampled on
the same clock (t_n = n / f_s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AliasingError, InvalidDelayError, InvalidParameterError, UndefinedSnrError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value

# Tolerance (in samples) when converting a continuous time to a sample index,
# so that e.g. T*f_s = 10000.000000001 still yields 10000.
_INDEX_EPS = 1e-6


def _first_index_at_or_after(t: float, fs: float) -> int:
    return int(math.ceil(t * fs - _INDEX_EPS))


def chirp_rate(bandwidth_hz: float, duration_s: float) -> float:
    """Return the linear FM slope k = W / T in Hz/s."""
    if not bandwidth_hz > 0 or not math.isfinite(bandwidth_hz):
        raise InvalidParameterError(f"bandwidth_hz must be > 0, got {bandwidth_hz!r}")
    if not duration_s > 0 or not math.isfinite(duration_s):
        raise InvalidParameterError(f"duration_s must be > 0, got {duration_s!r}")
    return bandwidth_hz / duration_s


@dataclass(frozen=True)
class ChirpParams:
    bandwidth_hz: float
    duration_s: float
    amplitude: float = 1.0
    chirp_rate: float = field(init=False)

    def __post_init__(self):
        k = chirp_rate(self.bandwidth_hz, self.duration_s)
        if not self.amplitude > 0 or not math.isfinite(self.amplitude):
            raise InvalidParameterError(f"amplitude must be > 0, got {self.amplitude!r}")
        object.__setattr__(self, "chirp_rate", k)

    @property
    def range_cell_m(self) -> float:
        """Intrinsic range resolution C / (2W)."""
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def time_bandwidth(self) -> float:
        return self.bandwidth_hz * self.duration_s

    def n_samples(self, sample_rate_hz: float) -> int:
        return int(round(self.duration_s * sample_rate_hz))


@dataclass(eq=False)
class SampledSignal:
    """Uniformly sampled complex series, t_n = start_time_s + n / sample_rate_hz."""

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise InvalidParameterError("samples must be a non-empty 1-D array")
        if not self.sample_rate_hz > 0 or not math.isfinite(self.sample_rate_hz):
            raise InvalidParameterError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz!r}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz


@dataclass(frozen=True)
class PointTarget:
    x_m: float
    y_m: float
    reflectivity: complex = 1.0

    def distance_to(self, position: Sequence[float]) -> float:
        return math.hypot(self.x_m - position[0], self.y_m - position[1])


@dataclass(frozen=True)
class Scene:
    targets: tuple[PointTarget, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))


def round_trip_delay(range_m: float) -> float:
    """tau = 2R / C."""
    return 2.0 * range_m / SPEED_OF_LIGHT


def _check_rate(params: ChirpParams, sample_rate_hz: float) -> None:
    if not sample_rate_hz > 0:
        raise InvalidParameterError(f"sample_rate_hz must be > 0, got {sample_rate_hz!r}")
    if sample_rate_hz < params.bandwidth_hz:
        raise AliasingError(
            f"sample rate {sample_rate_hz:g} Hz aliases a {params.bandwidth_hz:g} Hz chirp; "
            f"complex sampling needs at least {params.bandwidth_hz:g} Hz"
        )


def make_chirp(params: ChirpParams, sample_rate_hz: float) -> SampledSignal:
    """Sample the transmit chirp on [0, T) at ``sample_rate_hz``."""
    _check_rate(params, sample_rate_hz)
    n = params.n_samples(sample_rate_hz)
    t = np.arange(n) / sample_rate_hz
    samples = params.amplitude * np.exp(1j * np.pi * params.chirp_rate * t**2)
    return SampledSignal(samples, sample_rate_hz, 0.0)


def echo_length(params: ChirpParams, sample_rate_hz: float, max_delay_s: float) -> int:
    """Samples needed to hold an echo of delay up to ``max_delay_s``, i.e. [0, T + tau_max)."""
    return _first_index_at_or_after(params.duration_s + max_delay_s, sample_rate_hz)


def point_target_echo(
    params: ChirpParams,
    sample_rate_hz: float,
    delay_s: float,
    reflectivity: complex = 1.0,
    n_samples: int | None = None,
) -> SampledSignal:
    """Echo of a single scatterer: reflectivity * s_t(t - delay_s).

    The output starts at t = 0 and holds ``n_samples`` samples (default: just
    enough to cover [0, T + delay_s)).
    """
    _check_rate(params, sample_rate_hz)
    if not delay_s >= 0:
        raise InvalidDelayError(f"delay must be >= 0, got {delay_s!r}")
    if delay_s >= params.duration_s:
        raise InvalidDelayError(
            f"delay {delay_s:g} s is not shorter than the chirp ({params.duration_s:g} s); "
            "transmit and echo would not overlap"
        )
    if n_samples is None:
        n_samples = echo_length(params, sample_rate_hz, delay_s)
    out = np.zeros(n_samples, dtype=complex)
    start = _first_index_at_or_after(delay_s, sample_rate_hz)
    stop = min(_first_index_at_or_after(delay_s + params.duration_s, sample_rate_hz), n_samples)
    if stop > start:
        t = np.arange(start, stop) / sample_rate_hz - delay_s
        out[start:stop] = (
            reflectivity * params.amplitude * np.exp(1j * np.pi * params.chirp_rate * t**2)
        )
    return SampledSignal(out, sample_rate_hz, 0.0)


def scene_echo(
    scene: Scene,
    radar_position: Sequence[float],
    params: ChirpParams,
    sample_rate_hz: float,
    max_delay_s: float | None = None,
) -> SampledSignal:
    """Superpose the echoes of every target seen from ``radar_position``.

    ``max_delay_s`` fixes the record length to [0, T + max_delay_s) so that
    records from different positions line up; it is raised to the largest
    target delay when that is longer.
    """
    _check_rate(params, sample_rate_hz)
    delays = [round_trip_delay(tgt.distance_to(radar_position)) for tgt in scene.targets]
    pad = max(delays + [max_delay_s or 0.0])
    n = echo_length(params, sample_rate_hz, pad)
    total = np.zeros(n, dtype=complex)
    for tgt, tau in zip(scene.targets, delays):
        total += point_target_echo(params, sample_rate_hz, tau, tgt.reflectivity, n).samples
    return SampledSignal(total, sample_rate_hz, 0.0)


def add_awgn(
    signal: SampledSignal,
    snr_in_db: float,
    seed: int | Sequence[int] | np.random.SeedSequence,
    reference_power: float | None = None,
    noise_bandwidth_hz: float | None = None,
) -> SampledSignal:
    """Add circularly-symmetric complex white Gaussian noise.

    The noise power inside ``noise_bandwidth_hz`` (default: the full sample
    rate) equals ``P / 10**(snr_in_db/10)``.  ``P`` is the mean power over the
    signal's support (its nonzero samples) unless ``reference_power`` is given.
    When the band is narrower than the sample rate the per-sample variance is
    scaled up by ``f_s / B`` so the in-band level stays calibrated.
    """
    x = signal.samples
    if reference_power is None:
        support = np.abs(x) > 0
        if not support.any():
            raise UndefinedSnrError("signal has zero power; SNR is undefined")
        reference_power = float(np.mean(np.abs(x[support]) ** 2))
    if not reference_power > 0:
        raise UndefinedSnrError(f"reference power must be > 0, got {reference_power!r}")
    if noise_bandwidth_hz is None:
        noise_bandwidth_hz = signal.sample_rate_hz
    if not 0 < noise_bandwidth_hz <= signal.sample_rate_hz:
        raise InvalidParameterError("noise bandwidth must lie in (0, sample_rate_hz]")

    variance = reference_power / 10.0 ** (snr_in_db / 10.0)
    variance *= signal.sample_rate_hz / noise_bandwidth_hz
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((2, x.size))
    noise = math.sqrt(variance / 2.0) * (draws[0] + 1j * draws[1])
    return SampledSignal(x + noise, signal.sample_rate_hz, signal.start_time_s)
