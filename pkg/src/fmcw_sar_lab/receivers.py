"""Stretch, matched-filter and reconstruction-based FMCW receivers.

* stretch:  rx * conj(s_t) -> brickwall low-pass -> decimate -> DFT
* matched:  full-rate rx -> correlate with the unit-energy replica
* proposed: stretch front end at the low rate, then upsample and multiply by
  exp(j*pi*k*t**2) to undo the dechirp, then the matched filter.

With s_t(t) = exp(j*pi*k*t**2) the beat tone of a delay tau is
exp(j*pi*k*(tau**2 - 2*tau*t)), i.e. it sits at frequency -k*tau.  Range
profiles therefore use the positive-exponent DFT kernel so that range grows
with bin index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, ConfigError
from .signal_core import SPEED_OF_LIGHT, ChirpParams, SampledSignal, make_chirp

STRETCH = "stretch"
MATCHED = "matched"
PROPOSED = "proposed"
ARCHITECTURES = (STRETCH, MATCHED, PROPOSED)

BEAT_GUARD = 1.25  # required margin of f_low over the largest beat bandwidth 2*k*tau_max


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _rates_match(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(abs(a), abs(b))


@dataclass(eq=False)
class RangeProfile:
    values: np.ndarray
    range_axis_m: np.ndarray
    architecture: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.range_axis_m = np.asarray(self.range_axis_m, dtype=float)
        if self.values.shape != self.range_axis_m.shape or self.values.ndim != 1:
            raise ValueError("values and range_axis_m must be 1-D arrays of equal length")
        if self.range_axis_m.size == 0:
            raise ValueError("empty range profile")
        if self.range_axis_m[0] < 0 or np.any(np.diff(self.range_axis_m) <= 0):
            raise ValueError("range axis must start at >= 0 and be strictly increasing")
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def peak_index(self) -> int:
        # np.argmax returns the first maximum, i.e. lowest index wins ties
        return int(np.argmax(np.abs(self.values)))

    @property
    def peak_range_m(self) -> float:
        return float(self.range_axis_m[self.peak_index])


@dataclass(frozen=True)
class AdcConfig:
    """Low-rate (beat) ADC and the full-rate clock it is upsampled back to."""

    low_rate_hz: float
    high_rate_hz: float
    upsample_factor: int = field(init=False)

    def __post_init__(self):
        if not self.low_rate_hz > 0 or not self.high_rate_hz > 0:
            raise ConfigError("ADC rates must be > 0")
        ratio = self.high_rate_hz / self.low_rate_hz
        factor = int(round(ratio))
        if factor < 1 or abs(factor * self.low_rate_hz - self.high_rate_hz) > 1e-9 * self.high_rate_hz:
            raise ConfigError(
                f"high_rate_hz / low_rate_hz = {ratio:g} is not an integer >= 1"
            )
        object.__setattr__(self, "upsample_factor", factor)

    def max_delay_s(self, params: ChirpParams, guard: float = 1.0) -> float:
        """Largest delay whose beat tone fits in the low-rate band with ``guard``."""
        return self.low_rate_hz / (2.0 * params.chirp_rate * guard)

    def max_range_m(self, params: ChirpParams) -> float:
        """Unambiguous range of the low-rate channel, C * f_low / (4k)."""
        return SPEED_OF_LIGHT * self.max_delay_s(params) / 2.0

    def validate(self, params: ChirpParams, max_delay_s: float = 0.0, guard: float = BEAT_GUARD) -> None:
        """Raise ConfigError unless this ADC pair can serve ``params`` out to ``max_delay_s``."""
        if self.high_rate_hz < params.bandwidth_hz:
            raise ConfigError(
                f"high_rate_hz {self.high_rate_hz:g} is below the chirp bandwidth "
                f"{params.bandwidth_hz:g}"
            )
        n_high = params.duration_s * self.high_rate_hz
        if abs(n_high - round(n_high)) > 1e-6:
            raise ConfigError("chirp duration is not a whole number of high-rate samples")
        if int(round(n_high)) % self.upsample_factor:
            raise ConfigError(
                f"{int(round(n_high))} high-rate samples per chirp is not divisible by "
                f"upsample factor {self.upsample_factor}"
            )
        needed = 2.0 * params.chirp_rate * max_delay_s * guard
        if self.low_rate_hz < needed:
            raise ConfigError(
                f"low_rate_hz {self.low_rate_hz:g} is below {needed:g} Hz needed for "
                f"beat tones up to delay {max_delay_s:g} s (guard {guard:g})"
            )


def _band_bins(n_low: int) -> np.ndarray:
    """Signed DFT bin indices -n_low//2 .. ceil(n_low/2)-1 in FFT order."""
    return np.rint(np.fft.fftfreq(n_low) * n_low).astype(int)


def _chirp_counts(params: ChirpParams, adc: AdcConfig) -> tuple[int, int]:
    n_high = params.n_samples(adc.high_rate_hz)
    if n_high % adc.upsample_factor:
        raise ConfigError(
            f"{n_high} high-rate samples per chirp is not divisible by "
            f"upsample factor {adc.upsample_factor}"
        )
    return n_high, n_high // adc.upsample_factor


def stretch_dechirp(rx: SampledSignal, params: ChirpParams, adc: AdcConfig) -> SampledSignal:
    """Mix with the conjugate transmit chirp, low-pass to f_low/2 and decimate.

    The mixer output only exists while the reference is on, [0, T).  Filtering
    and decimation are done together in the frequency domain: the N_low bins
    of the full-rate spectrum inside the low-rate band are kept (scaled by
    1/L) and inverse-transformed at the low rate, which equals an ideal
    brickwall followed by taking every L-th sample.
    """
    if not _rates_match(rx.sample_rate_hz, adc.high_rate_hz) or rx.start_time_s != 0.0:
        raise AlignmentError(
            f"rx must be on the chirp clock at {adc.high_rate_hz:g} Hz starting at t=0"
        )
    n_high, n_low = _chirp_counts(params, adc)
    x = np.zeros(n_high, dtype=complex)
    m = min(n_high, len(rx))
    x[:m] = rx.samples[:m]
    ref = make_chirp(params, adc.high_rate_hz).samples
    spectrum = np.fft.fft(x * np.conj(ref))
    bins = _band_bins(n_low)
    beat = np.fft.ifft(spectrum[bins % n_high] / adc.upsample_factor)
    return SampledSignal(beat, adc.low_rate_hz, 0.0)


def stretch_range_profile(beat: SampledSignal, params: ChirpParams) -> RangeProfile:
    """Windowless DFT of the beat signal mapped to range.

    The DFT is zero-padded to the next power of two N; bin m maps to beat
    frequency m*f_low/N and range C*f/(2k).  Only the first N/2 bins are
    kept, covering [0, C*f_low/(4k)).
    """
    n_fft = _next_pow2(len(beat))
    spectrum = np.fft.ifft(beat.samples, n_fft) * n_fft
    m = np.arange(n_fft // 2)
    freq = m * beat.sample_rate_hz / n_fft
    ranges = SPEED_OF_LIGHT * freq / (2.0 * params.chirp_rate)
    return RangeProfile(spectrum[: n_fft // 2], ranges, STRETCH)


def replica(params: ChirpParams, sample_rate_hz: float) -> np.ndarray:
    """Transmit chirp scaled to unit energy."""
    h = make_chirp(params, sample_rate_hz).samples
    return h / np.linalg.norm(h)


def fast_correlate(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """y[l] = sum_n x[n] * conj(h[n - l]) for lags l = 0 .. len(x)-1, via FFT."""
    n_fft = _next_pow2(len(x) + len(h) - 1)
    y = np.fft.ifft(np.fft.fft(x, n_fft) * np.conj(np.fft.fft(h, n_fft)))
    return y[: len(x)]


def matched_filter_range_profile(
    rx: SampledSignal, params: ChirpParams, architecture: str = MATCHED
) -> RangeProfile:
    """Correlate with the unit-energy replica; lag n maps to range C*n/(2*f_s).

    Noise power per sample is preserved and a noise-free echo of energy E
    peaks at sqrt(E).
    """
    h = replica(params, rx.sample_rate_hz)
    y = fast_correlate(rx.samples, h)
    ranges = SPEED_OF_LIGHT * np.arange(len(y)) / (2.0 * rx.sample_rate_hz)
    return RangeProfile(y, ranges, architecture)


def upsample(signal: SampledSignal, factor: int) -> SampledSignal:
    """Band-limited interpolation by zero-padding the spectrum.

    Exact for periodic band-limited input; original samples are reproduced at
    every ``factor``-th output sample.  For even lengths the Nyquist bin is kept
    at the negative edge, matching ``stretch_dechirp``.
    """
    if isinstance(factor, bool) or int(factor) != factor or factor < 1:
        raise ConfigError(f"upsample factor must be an integer >= 1, got {factor!r}")
    factor = int(factor)
    if factor == 1:
        return SampledSignal(signal.samples.copy(), signal.sample_rate_hz, signal.start_time_s)
    n = len(signal)
    padded = np.zeros(n * factor, dtype=complex)
    padded[_band_bins(n) % (n * factor)] = np.fft.fft(signal.samples) * factor
    return SampledSignal(
        np.fft.ifft(padded), signal.sample_rate_hz * factor, signal.start_time_s
    )


def downsample(signal: SampledSignal, factor: int) -> SampledSignal:
    """Keep every ``factor``-th sample (no filtering)."""
    if isinstance(factor, bool) or int(factor) != factor or factor < 1:
        raise ConfigError(f"downsample factor must be an integer >= 1, got {factor!r}")
    factor = int(factor)
    return SampledSignal(
        signal.samples[::factor].copy(), signal.sample_rate_hz / factor, signal.start_time_s
    )


def reconstruct_received(beat: SampledSignal, params: ChirpParams, adc: AdcConfig) -> SampledSignal:
    """Rebuild the full-rate echo from the low-rate beat signal.

    Upsample by L, then multiply by exp(j*pi*k*t**2) on the high-rate clock so
    that s_if * s_t / A**2 = s_r over [0, T).  Only the overlap window
    [tau, T) of each echo survives.
    """
    _, n_low = _chirp_counts(params, adc)
    if not _rates_match(beat.sample_rate_hz, adc.low_rate_hz):
        raise AlignmentError(
            f"beat sampled at {beat.sample_rate_hz:g} Hz, ADC low rate is {adc.low_rate_hz:g} Hz"
        )
    if beat.start_time_s != 0.0:
        raise AlignmentError(f"beat must start at t=0, starts at {beat.start_time_s:g} s")
    if len(beat) != n_low:
        raise AlignmentError(f"beat has {len(beat)} samples, expected {n_low} for one chirp")
    up = upsample(beat, adc.upsample_factor)
    # s_if * s_t carries |s_t|**2 = A**2; divide it out so the result is s_r itself
    ref = make_chirp(params, adc.high_rate_hz).samples / params.amplitude**2
    return SampledSignal(up.samples * ref, adc.high_rate_hz, 0.0)


def proposed_range_profile(beat: SampledSignal, params: ChirpParams, adc: AdcConfig) -> RangeProfile:
    rec = reconstruct_received(beat, params, adc)
    return matched_filter_range_profile(rec, params, PROPOSED)


def range_profile(
    rx: SampledSignal, architecture: str, params: ChirpParams, adc: AdcConfig
) -> RangeProfile:
    """Run a full-rate received record through the named receiver."""
    if architecture == MATCHED:
        if not _rates_match(rx.sample_rate_hz, adc.high_rate_hz):
            raise AlignmentError("matched filter expects rx at the ADC high rate")
        return matched_filter_range_profile(rx, params)
    beat = stretch_dechirp(rx, params, adc)
    if architecture == STRETCH:
        return stretch_range_profile(beat, params)
    if architecture == PROPOSED:
        return proposed_range_profile(beat, params, adc)
    raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")


def beat_frequency_hz(range_m: float | np.ndarray, params: ChirpParams):
    """Beat-tone frequency magnitude k*tau for a target at ``range_m``."""
    return params.chirp_rate * 2.0 * np.asarray(range_m) / SPEED_OF_LIGHT


def guarded_window(params: ChirpParams, adc: AdcConfig, max_delay_s: float, guard_samples: int = 64) -> slice:
    """High-rate sample window [tau_max + g, T - g), g = ``guard_samples`` low-rate periods.

    The brickwall filter rings at the two ends of the beat record (the echo
    onset at tau and the reference cutoff at T); the ringing decays only as
    1/distance, so fidelity comparisons skip a guard at each end.
    """
    g = guard_samples / adc.low_rate_hz
    start = int(math.ceil((max_delay_s + g) * adc.high_rate_hz - 1e-6))
    stop = int(math.floor((params.duration_s - g) * adc.high_rate_hz + 1e-6))
    if stop <= start:
        raise ConfigError("guard leaves an empty comparison window")
    return slice(start, stop)
