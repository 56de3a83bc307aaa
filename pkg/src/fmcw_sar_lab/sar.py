"""Circular-aperture acquisition and global backprojection (GBP)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .receivers import ARCHITECTURES, AdcConfig, RangeProfile, range_profile
from .signal_core import ChirpParams, Scene, add_awgn, round_trip_delay, scene_echo


@dataclass(frozen=True)
class Trajectory:
    """N radar positions evenly spaced on a circle, angle_n = 2*pi*n/N."""

    center: tuple[float, float]
    radius_m: float
    n_positions: int

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius_m > 0 or not math.isfinite(self.radius_m):
            raise ConfigError(f"trajectory radius must be > 0, got {self.radius_m!r}")
        if int(self.n_positions) != self.n_positions or self.n_positions < 1:
            raise ConfigError(f"n_positions must be an integer >= 1, got {self.n_positions!r}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_positions) / self.n_positions

    @property
    def positions(self) -> np.ndarray:
        a = self.angles
        return np.column_stack(
            (self.center[0] + self.radius_m * np.cos(a), self.center[1] + self.radius_m * np.sin(a))
        )

    def __len__(self) -> int:
        return self.n_positions


def circular_trajectory(center: Sequence[float], radius_m: float, n_positions: int) -> Trajectory:
    return Trajectory((center[0], center[1]), radius_m, n_positions)


@dataclass(frozen=True)
class ImageGrid:
    """Pixel-center grid; ``values[iy, ix]`` with y ascending along rows."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.x_max > self.x_min or not self.y_max > self.y_min:
            raise ConfigError("grid extents must satisfy x_max > x_min and y_max > y_min")
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("grid needs at least 2 pixels per axis")
        if self.values is not None and np.shape(self.values) != (self.ny, self.nx):
            raise ConfigError(f"values shape {np.shape(self.values)} != ({self.ny}, {self.nx})")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def pixel_spacing(self) -> tuple[float, float]:
        return (self.x_max - self.x_min) / (self.nx - 1), (self.y_max - self.y_min) / (self.ny - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    def with_values(self, values: np.ndarray) -> "ImageGrid":
        return ImageGrid(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny, values)

    def check_sampling(self, params: ChirpParams) -> None:
        """Pixels must not be coarser than a range cell."""
        cell = params.range_cell_m
        if max(self.pixel_spacing) > cell:
            raise ConfigError(
                f"pixel spacing {max(self.pixel_spacing):.4g} m exceeds range cell {cell:.4g} m"
            )

    def corners(self) -> np.ndarray:
        return np.array(
            [[self.x_min, self.y_min], [self.x_min, self.y_max], [self.x_max, self.y_min], [self.x_max, self.y_max]]
        )


def _map_ordered(func, items: Iterable, threads: int):
    """Like ``map`` but optionally on a thread pool; results keep input order."""
    if threads <= 1:
        return map(func, items)
    pool = ThreadPoolExecutor(max_workers=threads)
    try:
        return list(pool.map(func, items))
    finally:
        pool.shutdown()


def acquire(
    scene: Scene,
    trajectory: Trajectory,
    architecture: str,
    params: ChirpParams,
    adc: AdcConfig,
    snr_in_db: float | None,
    seed: int,
    max_delay_s: float | None = None,
    threads: int = 1,
) -> list[RangeProfile]:
    """One range profile per trajectory position.

    Noise (``snr_in_db`` not None) is added to the full-rate record before any
    receiver processing.  SNR_in is referenced to the power of a
    unit-reflectivity echo (A**2) over the chirp bandwidth W, so an empty scene
    still gets a well-defined noise level.  Position n draws its noise from
    the seed sequence (seed, n).

    Records are padded to [0, T + max_delay_s); the default is the low-rate
    channel's unambiguous delay so every position yields the same range axis.
    """
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if max_delay_s is None:
        max_delay_s = min(adc.max_delay_s(params), params.duration_s * (1 - 1e-9))
    positions = trajectory.positions

    def one(n: int) -> RangeProfile:
        rx = scene_echo(scene, positions[n], params, adc.high_rate_hz, max_delay_s)
        if snr_in_db is not None:
            rx = add_awgn(
                rx,
                snr_in_db,
                seed=(seed, n),
                reference_power=params.amplitude**2,
                noise_bandwidth_hz=params.bandwidth_hz,
            )
        return range_profile(rx, architecture, params, adc)

    return list(_map_ordered(one, range(len(positions)), threads))


def interpolate_profile(profile: RangeProfile, query_range_m):
    """Linear interpolation of the complex profile; zero outside its range axis."""
    r = profile.range_axis_m
    q = np.asarray(query_range_m, dtype=float)
    re = np.interp(q, r, profile.values.real, left=0.0, right=0.0)
    im = np.interp(q, r, profile.values.imag, left=0.0, right=0.0)
    out = re + 1j * im
    return complex(out) if out.ndim == 0 else out


def gbp_image(
    profiles: Sequence[RangeProfile],
    trajectory: Trajectory,
    grid: ImageGrid,
    threads: int = 1,
) -> ImageGrid:
    """Magnitude backprojection averaged over positions.

    pixel(x, y) = mean_n |profile_n(dist(position_n, (x, y)))|

    Per-position layers may be computed concurrently but are summed in
    position order, so the result does not depend on ``threads``.
    """
    if len(profiles) != len(trajectory):
        raise ValueError(
            f"{len(profiles)} profiles for a trajectory of {len(trajectory)} positions"
        )
    xx, yy = grid.mesh()
    positions = trajectory.positions

    def layer(n: int) -> np.ndarray:
        d = np.hypot(xx - positions[n, 0], yy - positions[n, 1])
        return np.abs(interpolate_profile(profiles[n], d))

    image = np.zeros_like(xx)
    batch = max(1, threads) * 4
    for start in range(0, len(positions), batch):
        for contribution in _map_ordered(layer, range(start, min(start + batch, len(positions))), threads):
            image += contribution
    return grid.with_values(image / len(positions))


def max_delay_for(trajectory: Trajectory, grid: ImageGrid, scene: Scene) -> float:
    """Largest round-trip delay between any position and any pixel or target."""
    pos = trajectory.positions
    pts = [grid.corners()]
    if scene.targets:
        pts.append(np.array([[t.x_m, t.y_m] for t in scene.targets]))
    pts = np.vstack(pts)
    d = np.hypot(pos[:, None, 0] - pts[None, :, 0], pos[:, None, 1] - pts[None, :, 1])
    return round_trip_delay(float(d.max()))
