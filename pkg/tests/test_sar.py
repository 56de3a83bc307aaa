import math

import numpy as np
import pytest

from fmcw_sar_lab import (
    AdcConfig,
    ChirpParams,
    ConfigError,
    ImageGrid,
    PointTarget,
    RangeProfile,
    Scene,
    acquire,
    circular_trajectory,
    gbp_image,
    interpolate_profile,
    peak_location,
)

# 100 MHz chirp: 1.5 m range cell; a 40 m square grid at 0.8 m pixels
SMALL = ChirpParams(1e8, 1e-5)
SMALL_ADC = AdcConfig(2e7, 2e8)
SMALL_GRID = ImageGrid(-20.0, 20.0, -20.0, 20.0, 51, 51)


def test_circular_trajectory_four_points():
    traj = circular_trajectory((0, 0), 10, 4)
    np.testing.assert_allclose(traj.positions, [[10, 0], [0, 10], [-10, 0], [0, -10]], atol=1e-9)


def test_circular_trajectory_single_point():
    traj = circular_trajectory((1.0, -2.0), 3.0, 1)
    np.testing.assert_allclose(traj.positions, [[4.0, -2.0]])


@pytest.mark.parametrize("n", [3, 7, 180])
def test_trajectory_even_spacing_on_circle(n):
    traj = circular_trajectory((0.5, 1.5), 10.0, n)
    d = np.hypot(*(traj.positions - [0.5, 1.5]).T)
    assert np.all(np.abs(d - 10.0) < 1e-9 * 10.0)
    chords = np.hypot(*np.diff(np.vstack([traj.positions, traj.positions[:1]]), axis=0).T)
    assert np.ptp(chords) < 1e-9


@pytest.mark.parametrize("radius, n", [(0, 4), (-1, 4), (5, 0)])
def test_trajectory_rejects_bad_geometry(radius, n):
    with pytest.raises(ConfigError):
        circular_trajectory((0, 0), radius, n)


def test_acquire_empty_scene_is_quiet():
    traj = circular_trajectory((0, 0), 30, 6)
    for arch in ("stretch", "matched", "proposed"):
        profiles = acquire(Scene(), traj, arch, SMALL, SMALL_ADC, 300.0, seed=1)
        assert len(profiles) == 6
        assert max(np.abs(p.values).max() for p in profiles) < 1e-9


@pytest.mark.parametrize("arch", ["stretch", "matched", "proposed"])
def test_acquire_profiles_peak_at_geometric_range(arch):
    traj = circular_trajectory((0, 0), 30, 8)
    target = PointTarget(6.0, -9.0)
    profiles = acquire(Scene((target,)), traj, arch, SMALL, SMALL_ADC, None, seed=0)
    for pos, prof in zip(traj.positions, profiles):
        assert abs(prof.peak_range_m - target.distance_to(pos)) <= SMALL.range_cell_m


def test_acquire_is_deterministic_and_thread_independent():
    traj = circular_trajectory((0, 0), 30, 6)
    scene = Scene((PointTarget(3.0, 4.0),))
    a = acquire(scene, traj, "proposed", SMALL, SMALL_ADC, -10.0, seed=9)
    b = acquire(scene, traj, "proposed", SMALL, SMALL_ADC, -10.0, seed=9, threads=4)
    c = acquire(scene, traj, "proposed", SMALL, SMALL_ADC, -10.0, seed=10)
    assert all(x.values.tobytes() == y.values.tobytes() for x, y in zip(a, b))
    assert a[0].values.tobytes() != c[0].values.tobytes()
    # positions draw independent noise
    assert a[0].values.tobytes() != a[1].values.tobytes()


def _ramp_profile():
    r = np.linspace(0.0, 10.0, 11)
    return RangeProfile((2 + 1j) * r - 3j, r, "matched")


def test_interpolate_on_bin_and_midpoint():
    p = RangeProfile(np.array([1 + 1j, 3 - 1j, 0.5j]), np.array([0.0, 1.0, 2.0]), "stretch")
    assert interpolate_profile(p, 1.0) == 3 - 1j
    assert interpolate_profile(p, 0.5) == pytest.approx((1 + 1j + 3 - 1j) / 2, abs=1e-15)


def test_interpolate_recovers_linear_function():
    p = _ramp_profile()
    q = np.random.default_rng(0).uniform(0, 10, 200)
    assert np.max(np.abs(interpolate_profile(p, q) - ((2 + 1j) * q - 3j))) < 1e-12


def test_interpolate_out_of_range_is_zero():
    p = _ramp_profile()
    assert interpolate_profile(p, -0.1) == 0
    assert interpolate_profile(p, 10.5) == 0


def test_gbp_single_position_paints_circles():
    traj = circular_trajectory((0, 0), 5, 1)
    r = np.linspace(0, 20, 201)
    prof = RangeProfile(np.exp(-((r - 7) ** 2)) * (1 + 1j), r, "matched")
    grid = ImageGrid(-4, 4, -4, 4, 9, 9)
    img = gbp_image([prof], traj, grid)
    xx, yy = grid.mesh()
    d = np.hypot(xx - 5, yy)
    np.testing.assert_allclose(img.values, np.abs(interpolate_profile(prof, d)), rtol=0, atol=1e-15)


def test_gbp_linear_in_profile_magnitude():
    traj = circular_trajectory((0, 0), 30, 12)
    profiles = acquire(Scene((PointTarget(1.0, 2.0),)), traj, "matched", SMALL, SMALL_ADC, -5.0, seed=2)
    doubled = [RangeProfile(2 * p.values, p.range_axis_m, p.architecture) for p in profiles]
    a = gbp_image(profiles, traj, SMALL_GRID).values
    b = gbp_image(doubled, traj, SMALL_GRID).values
    np.testing.assert_allclose(b, 2 * a, rtol=1e-9)
    assert np.all(a >= 0)


def test_gbp_thread_count_does_not_change_pixels():
    traj = circular_trajectory((0, 0), 30, 13)
    profiles = acquire(Scene((PointTarget(1.0, 2.0),)), traj, "stretch", SMALL, SMALL_ADC, -5.0, seed=2)
    a = gbp_image(profiles, traj, SMALL_GRID).values
    b = gbp_image(profiles, traj, SMALL_GRID, threads=3).values
    assert a.tobytes() == b.tobytes()


def test_gbp_length_mismatch():
    traj = circular_trajectory((0, 0), 30, 3)
    with pytest.raises(ValueError):
        gbp_image([_ramp_profile()], traj, SMALL_GRID)


def test_baseline_target_localization_proposed(base_chirp, base_adc):
    traj = circular_trajectory((0, 0), 10, 180)
    grid = ImageGrid(-5, 5, -5, 5, 256, 256)
    profiles = acquire(Scene((PointTarget(2, -2),)), traj, "proposed", base_chirp, base_adc, None, seed=0)
    x, y = peak_location(gbp_image(profiles, traj, grid))
    assert math.hypot(x - 2, y + 2) <= base_chirp.range_cell_m


@pytest.mark.parametrize("arch", ["stretch", "matched", "proposed"])
def test_localization_property_sweep(arch):
    rng = np.random.default_rng(123)
    traj = circular_trajectory((0, 0), 30, 36)
    for _ in range(10):
        x0, y0 = rng.uniform(-16, 16, 2)  # interior 80% of the grid
        profiles = acquire(Scene((PointTarget(x0, y0),)), traj, arch, SMALL, SMALL_ADC, None, seed=0)
        x, y = peak_location(gbp_image(profiles, traj, SMALL_GRID))
        assert math.hypot(x - x0, y - y0) <= SMALL.range_cell_m


def test_rotation_covariance():
    # a quarter turn maps a 36-point circle and a square grid onto themselves
    traj = circular_trajectory((0, 0), 30, 36)
    target = PointTarget(7.3, -4.1)
    rotated = PointTarget(4.1, 7.3)
    img_a = gbp_image(acquire(Scene((target,)), traj, "proposed", SMALL, SMALL_ADC, None, 0), traj, SMALL_GRID)
    img_b = gbp_image(acquire(Scene((rotated,)), traj, "proposed", SMALL, SMALL_ADC, None, 0), traj, SMALL_GRID)
    xa, ya = peak_location(img_a)
    xb, yb = peak_location(img_b)
    pixel = max(SMALL_GRID.pixel_spacing)
    assert math.hypot(xb - (-ya), yb - xa) <= pixel * (1 + 1e-9)


def test_grid_sampling_check(base_chirp):
    ImageGrid(-5, 5, -5, 5, 256, 256).check_sampling(base_chirp)
    with pytest.raises(ConfigError):
        ImageGrid(-5, 5, -5, 5, 32, 32).check_sampling(base_chirp)
    with pytest.raises(ConfigError):
        ImageGrid(5, -5, -5, 5, 32, 32)
