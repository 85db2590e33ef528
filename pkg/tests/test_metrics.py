import numpy as np
import pytest

from rcbeam import (
    FrameRate,
    ImageGrid,
    Profile,
    RegionSamples,
    UnmeasurableProfile,
    disk_region_samples,
    effective_elevational_pitch,
    elevational_profile,
    expected_fwhm,
    frame_rate,
    fwhm,
    gcnr,
)

MM = 1e-3


def test_profile_validation():
    with pytest.raises(ValueError):
        Profile(np.array([0.0, 0.0, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        Profile(np.array([2.0, 1.0]), np.zeros(2))
    with pytest.raises(ValueError):
        Profile(np.array([0.0, 1.0]), np.array([1.0, -0.5]))
    with pytest.raises(ValueError):
        Profile(np.array([0.0, 1.0]), np.array([1.0]))


def test_fwhm_triangle():
    # triangle peaking at 1 with unit half-width: crossings at +-0.5 mm
    x = np.linspace(-2.0, 2.0, 41) * MM
    v = np.maximum(0.0, 1.0 - np.abs(x) / MM)
    assert fwhm(Profile(x, v)) == pytest.approx(1.0 * MM, rel=1e-12)


def test_fwhm_gaussian():
    sigma = 0.8 * MM
    x = np.linspace(-4.0, 4.0, 201) * MM
    v = np.exp(-(x**2) / (2 * sigma**2))
    want = 2.0 * np.sqrt(2.0 * np.log(2.0)) * sigma  # 2.3548 sigma
    assert fwhm(Profile(x, v)) == pytest.approx(want, abs=np.diff(x)[0])


def test_fwhm_scale_invariant():
    x = np.linspace(-4.0, 4.0, 201) * MM
    v = np.exp(-(x**2) / (2 * (0.5 * MM) ** 2))
    assert fwhm(Profile(x, 7.3 * v)) == pytest.approx(fwhm(Profile(x, v)), rel=1e-12)


def test_fwhm_ignores_secondary_lobes():
    # first crossing on each side of the peak wins; the sidelobes that rise
    # above half max farther out must not widen the measurement
    x = np.arange(9, dtype=float)
    v = np.array([0.7, 0.1, 0.4, 1.0, 0.4, 0.1, 0.7, 0.1, 0.0])
    # crossings bracketing the peak at x=3: left at 2 + 1/6, right at 3 + 5/6
    got = fwhm(Profile(x, v))
    assert got == pytest.approx(5.0 / 3.0, rel=1e-12)


def test_fwhm_unmeasurable_cases():
    x = np.linspace(0.0, 1.0, 11)
    with pytest.raises(UnmeasurableProfile):
        fwhm(Profile(x, np.zeros(11)))  # no positive peak
    with pytest.raises(UnmeasurableProfile):
        fwhm(Profile(x, np.linspace(0.1, 1.0, 11)))  # peak on the boundary
    flat_top = np.ones(11)
    flat_top[0] = flat_top[-1] = 0.0
    with pytest.raises(UnmeasurableProfile):
        fwhm(Profile(x, flat_top))  # peak not unique
    shallow = 0.6 + 0.4 * np.exp(-((x - 0.5) ** 2) / 0.01)
    with pytest.raises(UnmeasurableProfile):
        fwhm(Profile(x, shallow))  # never falls to half max
    with pytest.raises(UnmeasurableProfile):
        fwhm(Profile(x[:2], np.array([0.0, 1.0])))


def test_expected_fwhm_values():
    lam = 1452.0 / 4.3e6
    assert expected_fwhm(lam, 1.0) == pytest.approx(0.4728 * MM, abs=0.5e-6)
    assert expected_fwhm(lam, 2.0) == pytest.approx(2 * expected_fwhm(lam, 1.0))
    assert expected_fwhm(1.0 * MM, 1.0) == pytest.approx(1.4 * MM, rel=1e-15)
    with pytest.raises(ValueError):
        expected_fwhm(0.0, 1.0)


def test_gcnr_endpoints(rng):
    same = rng.uniform(0.0, 1.0, 5000)
    assert gcnr(RegionSamples(same, same.copy())) == 0.0
    lo = rng.uniform(0.0, 1.0, 5000)
    hi = rng.uniform(5.0, 6.0, 5000)
    assert gcnr(RegionSamples(lo, hi)) == 1.0


def test_gcnr_half_overlap(rng):
    # uniform on [0,1] vs uniform on [0.5,1.5]: half the mass overlaps, so
    # the separability is 0.5 up to histogram noise
    a = rng.uniform(0.0, 1.0, 200_000)
    b = rng.uniform(0.5, 1.5, 200_000)
    assert gcnr(RegionSamples(a, b)) == pytest.approx(0.5, abs=0.05)


def test_gcnr_monotone_map_invariance(rng):
    # gCNR depends on the sample ranks, not the scale: a strictly
    # increasing remap moves values between bins only at the edges
    a = rng.uniform(0.1, 1.0, 50_000)
    b = rng.uniform(0.6, 1.6, 50_000)
    bins = 100
    base = gcnr(RegionSamples(a, b), bins)
    sq = gcnr(RegionSamples(np.sqrt(a), np.sqrt(b)), bins)
    lg = gcnr(RegionSamples(np.log(a), np.log(b)), bins)
    assert abs(sq - base) <= 2.0 / bins
    assert abs(lg - base) <= 2.0 / bins


def test_gcnr_degenerate_and_validation():
    ones = np.ones(10)
    assert gcnr(RegionSamples(ones, ones)) == 0.0
    with pytest.raises(ValueError):
        gcnr(RegionSamples(ones, ones), bins=1)
    with pytest.raises(ValueError):
        RegionSamples(np.zeros(0), ones)
    with pytest.raises(ValueError):
        RegionSamples(ones, np.array([np.nan]))


def test_frame_rate_table():
    # the transmit-count scaling: full aperture, reduced, walking volume,
    # and full-volume retrospective schemes at a 4 kHz pulse rate
    assert frame_rate(128, 4000.0) == FrameRate(31, 31.25)
    assert frame_rate(16, 4000.0) == FrameRate(250, 250.0)
    assert frame_rate(256, 4000.0) == FrameRate(16, 15.625)
    assert frame_rate(2048, 4000.0) == FrameRate(2, 1.953125)
    with pytest.raises(ValueError):
        frame_rate(0, 4000.0)
    with pytest.raises(ValueError):
        frame_rate(16, 0.0)


def test_effective_pitch():
    # 500 um plane spacing at 4.3 MHz in 1452 m/s water: about 1.48
    # wavelengths, i.e. the half-wavelength criterion is missed by ~3x
    got = effective_elevational_pitch(500e-6, 1452.0, 4.3e6)
    assert got == pytest.approx(1.4807, abs=1e-4)
    assert abs(got - 1.5) <= 0.05
    lam = 1500.0 / 5e6
    assert effective_elevational_pitch(lam, 1500.0, 5e6) == pytest.approx(1.0)
    assert effective_elevational_pitch(2 * lam, 1500.0, 5e6) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        effective_elevational_pitch(0.0, 1500.0, 5e6)


def _grid_env():
    grid = ImageGrid(-1 * MM, -2 * MM, 4 * MM, 0.5 * MM, 0.5 * MM, 0.5 * MM, 5, 9, 7)
    env = np.zeros((5, 9, 7))
    return grid, env


def test_elevational_profile_extraction():
    grid, env = _grid_env()
    env[2, :, 3] = np.arange(9, dtype=float)
    p = elevational_profile(grid, env, x=0.1 * MM, z=5.4 * MM)
    assert np.array_equal(p.coordinates, grid.ys())
    assert np.array_equal(p.values, np.arange(9, dtype=float))


def test_disk_region_samples():
    grid, env = _grid_env()
    env += 1.0
    env[:, 4, 2] = 9.0  # y = 0, z = 5 mm
    s = disk_region_samples(grid, env, center_y=0.0, center_z=5 * MM,
                            radius=0.6 * MM, x_halfspan=0.6 * MM)
    # 5 voxels of the y-z cross pattern times 3 x slices
    assert s.size == 15
    assert np.sort(s)[-3:].tolist() == [9.0, 9.0, 9.0]
    with pytest.raises(ValueError):
        disk_region_samples(grid, env, 0.0, 50 * MM, 0.1 * MM, 0.6 * MM)
