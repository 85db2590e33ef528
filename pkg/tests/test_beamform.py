import numpy as np
import pytest

from rcbeam import (
    ApodizationConfig,
    ArrayGeometry,
    BeamformedVolume,
    ImageGrid,
    Phantom,
    Point3,
    PulseSpec,
    RfDataSet,
    TransmitPlan,
    apodization_weight,
    beamform_volume,
    das_pixel,
    decode,
    envelope,
    hadamard,
    log_compress,
    required_time_span,
    select_uforces_subset,
    simulate_scheme,
)
from rcbeam.encoding import DECODED

MM = 1e-3

GEOM = ArrayGeometry(
    n_rows=8, n_cols=8, pitch=0.4 * MM,
    center_frequency=4.0e6, sampling_rate=16.0e6, sound_speed=1500.0,
)
SPEC = PulseSpec(4.0e6, 0.7)
APOD = ApodizationConfig(f_number=1.0)


def decoded_point(geom, x0=0.0, y0=0.0, z0=8 * MM, focal_depth=8 * MM, planes=(0.0,)):
    ph = Phantom(np.array([[x0, y0, z0]]), np.ones(1))
    plan = TransmitPlan("forces", focal_depth, planes, geom.n_cols)
    span = required_time_span(geom, plan, ph, SPEC) + 2.0 / geom.sampling_rate
    rf = simulate_scheme(geom, plan, ph, SPEC, span)
    return decode(rf, hadamard(geom.n_cols)), plan


def test_apodization_weight_boxcar():
    ap = Point3(0.0, 0.0, 0.0)
    assert apodization_weight(Point3(0.0, 0.0, 20 * MM), ap, 1.0, "lateral") == 1.0
    # boundary is inclusive: 20 mm depth at f/1 accepts offsets up to 10 mm
    assert apodization_weight(Point3(10 * MM, 0.0, 20 * MM), ap, 1.0, "lateral") == 1.0
    assert apodization_weight(Point3(12 * MM, 0.0, 20 * MM), ap, 1.0, "lateral") == 0.0
    assert apodization_weight(Point3(0.0, 12 * MM, 20 * MM), ap, 1.0, "lateral") == 1.0
    assert apodization_weight(Point3(0.0, 12 * MM, 20 * MM), ap, 1.0, "elevational") == 0.0
    # wider f-number means a narrower accepted cone
    assert apodization_weight(Point3(6 * MM, 0.0, 20 * MM), ap, 2.0, "lateral") == 0.0


def test_apodization_weight_errors():
    ap = Point3(0.0, 0.0, 0.0)
    px = Point3(0.0, 0.0, 10 * MM)
    with pytest.raises(ValueError):
        apodization_weight(px, ap, 0.0, "lateral")
    with pytest.raises(ValueError):
        apodization_weight(Point3(0.0, 0.0, -1 * MM), ap, 1.0, "lateral")
    with pytest.raises(ValueError):
        apodization_weight(px, ap, 1.0, "axial")


def test_das_localizes_point_scatterer():
    x0, z0 = 0.3 * MM, 8 * MM
    decoded, plan = decoded_point(GEOM, x0=x0, z0=z0)
    grid = ImageGrid(
        -1.2 * MM, 0.0, z0 - 1 * MM, 0.3 * MM, 1.0, GEOM.wavelength / 8.0, 9, 1, 43
    )
    vol = beamform_volume(decoded, plan, grid, GEOM, APOD)
    ix, iy, iz = np.unravel_index(np.argmax(vol.envelope), vol.envelope.shape)
    assert grid.xs()[ix] == pytest.approx(x0, abs=0.31 * MM)
    assert abs(grid.zs()[iz] - z0) <= GEOM.wavelength / 2.0
    assert vol.envelope_db.max() == 0.0


def test_das_pixel_matches_volume_of_one():
    decoded, plan = decoded_point(GEOM)
    px = Point3(0.0, 0.0, 8 * MM)
    amp = das_pixel(px, decoded, plan, GEOM, APOD)
    grid = ImageGrid(px.x, px.y, px.z, 1.0, 1.0, 1.0, 1, 1, 1)
    vol = beamform_volume(decoded, plan, grid, GEOM, APOD)
    assert vol.amplitude[0, 0, 0] == amp
    assert vol.envelope[0, 0, 0] == abs(amp)
    assert amp != 0.0


def test_das_pixel_checks_inputs():
    decoded, plan = decoded_point(GEOM)
    px = Point3(0.0, 0.0, 8 * MM)
    enc = RfDataSet(decoded.data, decoded.sampling_rate, state="encoded")
    with pytest.raises(ValueError, match="decoded"):
        das_pixel(px, enc, plan, GEOM, APOD)
    short = TransmitPlan("forces", plan.focal_depth, (0.0, MM), GEOM.n_cols)
    with pytest.raises(ValueError, match="planes"):
        das_pixel(px, decoded, short, GEOM, APOD)


def test_transmit_count_needs_column_mapping():
    decoded, plan = decoded_point(GEOM)
    # drop transmits without recording which columns they were
    bad = RfDataSet(decoded.data[:, :3], decoded.sampling_rate, state=DECODED)
    with pytest.raises(ValueError, match="column mapping"):
        das_pixel(Point3(0.0, 0.0, 8 * MM), bad, plan, GEOM, APOD)


def test_rtb_equals_fixed_focus_in_plane():
    # one acquisition plane: the retrospective path collapses to the fixed
    # one for pixels in that plane beyond the focus
    f = 5 * MM
    decoded, _ = decoded_point(GEOM, z0=8 * MM, focal_depth=f)
    fixed = TransmitPlan("forces", f, (0.0,), GEOM.n_cols)
    rtb = TransmitPlan("forces_rtb", f, (0.0,), GEOM.n_cols, planes_per_image=2)
    # probe inside the point spread so the compared sums are nonzero
    for px in [
        Point3(0.0, 0.0, 8 * MM),
        Point3(0.3 * MM, 0.0, 8 * MM),
        Point3(-0.2 * MM, 0.0, 7.9 * MM),
    ]:
        a = das_pixel(px, decoded, fixed, GEOM, APOD)
        b = das_pixel(px, decoded, rtb, GEOM, APOD)
        assert b == pytest.approx(a, rel=1e-12)
        assert a != 0.0


def test_fixed_focus_volume_is_stack_of_bscans(rng):
    # each grid row at a plane position depends only on that plane's data
    planes = (-1 * MM, 0.0, 1 * MM)
    data = rng.standard_normal((3, GEOM.n_cols, GEOM.n_cols, 160))
    plan = TransmitPlan("forces", 6 * MM, planes, GEOM.n_cols)
    grid = ImageGrid(-0.6 * MM, -1 * MM, 5 * MM, 0.3 * MM, 1 * MM, 0.2 * MM, 5, 3, 12)
    full = beamform_volume(RfDataSet(data, GEOM.sampling_rate, state=DECODED),
                           plan, grid, GEOM, APOD)
    for p in range(3):
        only = np.zeros_like(data)
        only[p] = data[p]
        part = beamform_volume(RfDataSet(only, GEOM.sampling_rate, state=DECODED),
                               plan, grid, GEOM, APOD)
        assert np.array_equal(part.amplitude[:, p, :], full.amplitude[:, p, :])
        other = [q for q in range(3) if q != p]
        assert np.all(part.amplitude[:, other, :] == 0.0)


def test_uforces_subset_beamforms_like_masked_full():
    decoded, plan = decoded_point(GEOM)
    sub = select_uforces_subset(decoded, 3)  # keeps columns 1 and 5 of 8
    masked = np.zeros_like(decoded.data)
    masked[:, list(sub.column_indices)] = decoded.data[:, list(sub.column_indices)]
    vol_sub = beamform_volume(
        sub,
        TransmitPlan("uforces", plan.focal_depth, plan.plane_positions,
                     GEOM.n_cols, uforces_k=3),
        ImageGrid(-0.5 * MM, 0.0, 7 * MM, 0.25 * MM, 1.0, 0.1 * MM, 5, 1, 20),
        GEOM,
        APOD,
    )
    vol_full = beamform_volume(
        RfDataSet(masked, decoded.sampling_rate, state=DECODED),
        plan,
        ImageGrid(-0.5 * MM, 0.0, 7 * MM, 0.25 * MM, 1.0, 0.1 * MM, 5, 1, 20),
        GEOM,
        APOD,
    )
    assert np.allclose(vol_sub.amplitude, vol_full.amplitude, rtol=0, atol=1e-12)


def test_meta_counts_and_scheme():
    decoded, _ = decoded_point(GEOM, planes=(0.0, 0.5 * MM))
    plan = TransmitPlan(
        "uforces_rtb", 8 * MM, (0.0, 0.5 * MM), GEOM.n_cols,
        uforces_k=3, planes_per_image=2,
    )
    sub = select_uforces_subset(decoded, 3)
    grid = ImageGrid(0.0, 0.0, 7 * MM, 1.0, 0.25 * MM, 0.2 * MM, 1, 3, 6)
    vol = beamform_volume(sub, plan, grid, GEOM, APOD, dynamic_range_db=40.0)
    assert vol.meta["scheme"] == "uforces_rtb"
    assert vol.meta["transmit_events_per_image"] == 6
    assert vol.meta["effective_transmits_per_image"] == 4
    assert vol.meta["planes_per_image"] == 2
    assert vol.meta["dynamic_range_db"] == 40.0
    assert vol.meta["f_number"] == 1.0


def test_clip_counter_and_zero_contribution():
    decoded, plan = decoded_point(GEOM, z0=8 * MM)
    # a pixel so deep its echoes lie beyond the recorded span
    far = Point3(0.0, 0.0, 40 * MM)
    grid = ImageGrid(far.x, far.y, far.z, 1.0, 1.0, 1.0, 1, 1, 1)
    vol = beamform_volume(decoded, plan, grid, GEOM, APOD)
    assert vol.meta["clipped_samples"] > 0
    assert vol.amplitude[0, 0, 0] == 0.0

    near = beamform_volume(
        decoded, plan, ImageGrid(0.0, 0.0, 8 * MM, 1.0, 1.0, 1.0, 1, 1, 1), GEOM, APOD
    )
    assert near.meta["clipped_samples"] == 0


def test_peak_grows_with_aperture():
    # lowering the f-number admits more columns; the in-phase sum at the
    # true scatterer position must not lose amplitude
    decoded, plan = decoded_point(GEOM, z0=3 * MM, focal_depth=3 * MM)
    px = Point3(0.0, 0.0, 3 * MM)
    amps = [
        abs(das_pixel(px, decoded, plan, GEOM, ApodizationConfig(fn)))
        for fn in (2.0, 1.0, 0.5)
    ]
    assert amps[0] > 0
    assert amps[0] <= amps[1] <= amps[2]
    assert amps[2] > amps[0]  # the full sweep must actually add aperture


def test_envelope_of_cosine_is_flat():
    t = np.arange(2048)
    x = np.cos(2 * np.pi * 0.07 * t)
    env = envelope(x)
    core = env[200:-200]
    assert np.all(np.abs(core - 1.0) < 0.02)


def test_envelope_linearity_and_zeros():
    assert np.all(envelope(np.zeros(64)) == 0.0)
    x = np.sin(2 * np.pi * 0.05 * np.arange(256))
    assert np.allclose(envelope(3.7 * x), 3.7 * envelope(x), rtol=1e-12)
    with pytest.raises(ValueError):
        envelope(np.ones(1))


def test_log_compress_reference_points():
    env = np.array([1.0, 0.1, 1e-9, 0.0])
    db = log_compress(env, 60.0)
    assert db[0] == 0.0
    assert db[1] == pytest.approx(-20.0, abs=1e-12)
    assert db[2] == -60.0
    assert db[3] == -60.0
    assert np.all(log_compress(np.zeros(5), 40.0) == -40.0)
    with pytest.raises(ValueError):
        log_compress(env, 0.0)


def test_incoherent_compounding_bounds_coherent():
    decoded, _ = decoded_point(
        GEOM, z0=8 * MM, planes=(-0.5 * MM, 0.0, 0.5 * MM)
    )
    plan = TransmitPlan(
        "forces_rtb", 8 * MM, (-0.5 * MM, 0.0, 0.5 * MM), GEOM.n_cols,
        planes_per_image=3,
    )
    grid = ImageGrid(-0.4 * MM, -0.2 * MM, 7.5 * MM, 0.4 * MM, 0.2 * MM, 0.1 * MM, 3, 3, 12)
    coh = beamform_volume(decoded, plan, grid, GEOM, APOD, compounding="coherent")
    inc = beamform_volume(decoded, plan, grid, GEOM, APOD, compounding="incoherent")
    # envelope of a sum never exceeds the sum of envelopes
    assert np.all(inc.envelope >= coh.envelope - 1e-9 * coh.envelope.max())
    assert inc.meta["compounding"] == "incoherent"
    assert coh.meta["compounding"] == "coherent"
    with pytest.raises(ValueError):
        beamform_volume(decoded, plan, grid, GEOM, APOD, compounding="mean")


def test_thread_count_does_not_change_result():
    from rcbeam import set_thread_count

    decoded, plan = decoded_point(GEOM)
    grid = ImageGrid(-0.6 * MM, 0.0, 7 * MM, 0.3 * MM, 1.0, 0.1 * MM, 5, 1, 20)
    set_thread_count(1)
    a = beamform_volume(decoded, plan, grid, GEOM, APOD)
    set_thread_count(0)
    b = beamform_volume(decoded, plan, grid, GEOM, APOD)
    assert np.array_equal(a.amplitude, b.amplitude)


def test_volume_validation():
    grid = ImageGrid(0.0, 0.0, 1 * MM, 1.0, 1.0, 1.0, 2, 1, 1)
    ok = np.zeros((2, 1, 1))
    with pytest.raises(ValueError, match="shape"):
        BeamformedVolume(grid, np.zeros((1, 1, 1)), ok, ok)
    with pytest.raises(ValueError, match="0 dB"):
        BeamformedVolume(grid, ok, ok, np.full((2, 1, 1), 3.0))
    with pytest.raises(ValueError):
        ImageGrid(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1, 1, 1)
    with pytest.raises(ValueError):
        ImageGrid(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0, 1, 1)
