"""Delay-and-sum reconstruction for decoded row-column data.

Two transmit models are supported. Fixed-focus schemes treat each decoded
transmit as a point source at the transmitting column's azimuth, at the
elevation of the acquisition plane; every voxel uses only its nearest
plane, so a volume is a stack of independent B-scans. Retrospective
transmit schemes route the transmit leg through the plane's elevational
focal arc (a virtual source of radius focal_depth), take the arc-to-pixel
distance with a sign given by whether the pixel lies beyond or short of
the arc, and coherently compound the nearest ``planes_per_image`` planes.

Receive channels are columns, which are blind to elevation; their delay is
the in-plane distance from the channel's azimuth to the voxel. Both legs
use boxcar F-number gating, and retrospective compounding additionally
requires the voxel to sit inside the acceptance cone that opens from the
focal arc with the same F-number.

Sample times include the per-plane transmit time offset (the converging
wavefront crosses the focal arc max(d)/c - f/c after the first row fires),
matching the simulator's nonnegative-delay convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal
from numba import njit, prange

from .encoding import DECODED, RfDataSet
from .geometry import ArrayGeometry, FocalConfig, Point3, virtual_source_time_offset
from .simulate import TransmitPlan

__all__ = [
    "ImageGrid",
    "ApodizationConfig",
    "BeamformedVolume",
    "apodization_weight",
    "das_pixel",
    "beamform_volume",
    "envelope",
    "log_compress",
]


@dataclass(frozen=True)
class ImageGrid:
    """Regular voxel grid: origin, spacing, and counts per axis."""

    x0: float
    y0: float
    z0: float
    dx: float
    dy: float
    dz: float
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.dx, self.dy, self.dz) <= 0:
            raise ValueError("grid spacings must be positive")
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("grid counts must be >= 1")
        for v in (self.x0, self.y0, self.z0):
            if not math.isfinite(v):
                raise ValueError("grid origin must be finite")

    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    def zs(self) -> np.ndarray:
        return self.z0 + self.dz * np.arange(self.nz)

    @property
    def n_voxels(self) -> int:
        return self.nx * self.ny * self.nz


@dataclass(frozen=True)
class ApodizationConfig:
    """Boxcar acceptance on transmit and receive, parameterized by F-number."""

    f_number: float = 1.0

    def __post_init__(self):
        if self.f_number <= 0:
            raise ValueError(f"f_number must be positive, got {self.f_number}")


@dataclass
class BeamformedVolume:
    """Reconstruction output: signed sum, linear envelope, and dB image."""

    grid: ImageGrid
    amplitude: np.ndarray
    envelope: np.ndarray
    envelope_db: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.nx, self.grid.ny, self.grid.nz)
        for name in ("amplitude", "envelope", "envelope_db"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} shape {arr.shape} does not match grid {shape}")
        if self.envelope_db.size and self.envelope_db.max() > 1e-9:
            raise ValueError("envelope_db must be normalized to a 0 dB maximum")


def apodization_weight(
    px: Point3, aperture_point: Point3, f_number: float, direction: str
) -> float:
    """Boxcar acceptance: 1 when the offset along ``direction`` ("lateral"
    for x, "elevational" for y) is within depth / (2 f#) of the aperture
    point, boundary included, else 0."""
    if f_number <= 0:
        raise ValueError("f_number must be positive")
    depth = px.z - aperture_point.z
    if depth <= 0:
        raise ValueError("pixel must be deeper than the aperture point")
    if direction == "lateral":
        offset = px.x - aperture_point.x
    elif direction == "elevational":
        offset = px.y - aperture_point.y
    else:
        raise ValueError(f"direction must be 'lateral' or 'elevational', got {direction!r}")
    return 1.0 if abs(offset) <= depth / (2.0 * f_number) else 0.0


@njit(parallel=True, cache=True)
def _das_grid(
    data,
    plane_ys,
    plane_t0,
    tx_xs,
    rx_xs,
    xs,
    ys,
    zs,
    sel,
    cnt,
    focal_depth,
    f_number,
    c,
    fs,
    is_rtb,
    out,
):
    """Sum apodized, linearly interpolated samples for every voxel.

    sel[iy, :cnt[iy]] lists the plane indices voxels at grid row iy use.
    Returns the number of requested samples falling outside the recorded
    span (those contribute zero). Each prange iteration owns one (ix, iy)
    pencil of out, so results do not depend on the thread count.
    """
    n_planes, n_tx, n_rx, n_samples = data.shape
    nx = xs.size
    ny = ys.size
    nz = zs.size
    clipped = 0
    for ixy in prange(nx * ny):
        ix = ixy // ny
        iy = ixy - ix * ny
        vx = xs[ix]
        vy = ys[iy]
        for iz in range(nz):
            vz = zs[iz]
            half = vz / (2.0 * f_number)
            acc = 0.0
            for k in range(cnt[iy]):
                p = sel[iy, k]
                dy = vy - plane_ys[p]
                t0 = plane_t0[p]
                for t in range(n_tx):
                    dxt = vx - tx_xs[t]
                    if abs(dxt) > half:
                        continue
                    if is_rtb:
                        r_inplane = math.sqrt(dxt * dxt + vz * vz)
                        arc_dist = r_inplane - focal_depth
                        if abs(dy) > abs(arc_dist) / (2.0 * f_number):
                            continue
                        leg = math.sqrt(arc_dist * arc_dist + dy * dy)
                        tx_leg = focal_depth + (leg if arc_dist >= 0.0 else -leg)
                    else:
                        if abs(dy) > half:
                            continue
                        tx_leg = math.sqrt(dxt * dxt + dy * dy + vz * vz)
                    for ch in range(n_rx):
                        dxr = vx - rx_xs[ch]
                        if abs(dxr) > half:
                            continue
                        rx_leg = math.sqrt(dxr * dxr + vz * vz)
                        ts = (t0 + (tx_leg + rx_leg) / c) * fs
                        if ts < 0.0 or ts > n_samples - 1.0:
                            clipped += 1
                            continue
                        i0 = int(ts)
                        if i0 > n_samples - 2:
                            i0 = n_samples - 2
                        frac = ts - i0
                        acc += (1.0 - frac) * data[p, t, ch, i0] + frac * data[
                            p, t, ch, i0 + 1
                        ]
            out[ix, iy, iz] = acc
    return clipped


def _plane_selection(plan: TransmitPlan, grid_ys: np.ndarray):
    """Planes each grid row uses: nearest plane for fixed focus, the
    planes_per_image nearest (ties toward the lower index) otherwise."""
    plane_ys = np.asarray(plan.plane_positions)
    dist = np.abs(plane_ys[None, :] - grid_ys[:, None])
    if plan.is_rtb:
        n_use = min(plan.planes_per_image, plane_ys.size)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :n_use]
        sel = np.sort(nearest, axis=1).astype(np.int64)
        cnt = np.full(grid_ys.size, n_use, dtype=np.int64)
    else:
        sel = np.argmin(dist, axis=1).astype(np.int64)[:, None]
        cnt = np.ones(grid_ys.size, dtype=np.int64)
    return np.ascontiguousarray(sel), cnt


def _transmit_xs(decoded: RfDataSet, geom: ArrayGeometry) -> np.ndarray:
    col_xs = geom.col_xs()
    if decoded.column_indices is not None:
        return col_xs[list(decoded.column_indices)]
    if decoded.transmits != geom.n_cols:
        raise ValueError(
            f"decoded transmit count {decoded.transmits} does not match "
            f"{geom.n_cols} columns and no column mapping is present"
        )
    return col_xs


def _check_inputs(decoded: RfDataSet, plan: TransmitPlan):
    if decoded.state != DECODED:
        raise ValueError("beamforming expects decoded data")
    if decoded.planes != len(plan.plane_positions):
        raise ValueError(
            f"dataset has {decoded.planes} planes but the plan lists "
            f"{len(plan.plane_positions)}"
        )


def _run_das(decoded, plan, grid, geom, apod, sel, cnt):
    plane_t0 = np.array(
        [
            virtual_source_time_offset(geom, FocalConfig(plan.focal_depth, py))
            for py in plan.plane_positions
        ]
    )
    out = np.zeros((grid.nx, grid.ny, grid.nz))
    clipped = _das_grid(
        decoded.data,
        np.asarray(plan.plane_positions),
        plane_t0,
        _transmit_xs(decoded, geom),
        geom.col_xs(),
        grid.xs(),
        grid.ys(),
        grid.zs(),
        sel,
        cnt,
        plan.focal_depth,
        apod.f_number,
        geom.sound_speed,
        decoded.sampling_rate,
        plan.is_rtb,
        out,
    )
    return out, int(clipped)


def das_pixel(
    px: Point3,
    decoded: RfDataSet,
    plan: TransmitPlan,
    geom: ArrayGeometry,
    apod: ApodizationConfig,
) -> float:
    """Delay-and-sum amplitude at a single point."""
    _check_inputs(decoded, plan)
    grid = ImageGrid(px.x, px.y, px.z, 1.0, 1.0, 1.0, 1, 1, 1)
    sel, cnt = _plane_selection(plan, grid.ys())
    amp, _ = _run_das(decoded, plan, grid, geom, apod, sel, cnt)
    return float(amp[0, 0, 0])


def envelope(signal, axis: int = -1) -> np.ndarray:
    """Magnitude of the analytic signal along ``axis``; needs >= 2 samples."""
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[axis] < 2:
        raise ValueError("envelope needs at least 2 samples along the chosen axis")
    return np.abs(scipy.signal.hilbert(x, axis=axis))


def log_compress(env, dynamic_range_db: float) -> np.ndarray:
    """dB image relative to the global maximum, clamped to
    [-dynamic_range_db, 0]. An all-zero input maps to the floor."""
    if dynamic_range_db <= 0:
        raise ValueError("dynamic_range_db must be positive")
    e = np.asarray(env, dtype=np.float64)
    peak = e.max() if e.size else 0.0
    if peak <= 0:
        return np.full_like(e, -dynamic_range_db)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(e / peak)
    return np.maximum(db, -dynamic_range_db)


def beamform_volume(
    decoded: RfDataSet,
    plan: TransmitPlan,
    grid: ImageGrid,
    geom: ArrayGeometry,
    apod: ApodizationConfig,
    dynamic_range_db: float = 60.0,
    compounding: str = "coherent",
) -> BeamformedVolume:
    """Reconstruct a volume on ``grid`` from decoded data.

    ``compounding`` selects how retrospective transmit planes combine:
    "coherent" sums signed samples across planes before envelope detection
    (the default; this is what recovers elevational resolution), while
    "incoherent" detects the envelope per plane and sums magnitudes. With
    incoherent compounding the phase-free sum is stored in both amplitude
    and envelope. Envelope detection runs along the depth axis when the
    grid has at least 2 depth samples, otherwise it falls back to the
    absolute value.
    """
    _check_inputs(decoded, plan)
    if compounding not in ("coherent", "incoherent"):
        raise ValueError(f"compounding must be coherent or incoherent, got {compounding!r}")
    sel, cnt = _plane_selection(plan, grid.ys())

    def detect(amp):
        return envelope(amp, axis=2) if grid.nz >= 2 else np.abs(amp)

    if compounding == "coherent" or not plan.is_rtb:
        amp, clipped = _run_das(decoded, plan, grid, geom, apod, sel, cnt)
        env = detect(amp)
    else:
        env = np.zeros((grid.nx, grid.ny, grid.nz))
        clipped = 0
        ones = np.ones(grid.ny, dtype=np.int64)
        for k in range(sel.shape[1]):
            part, part_clipped = _run_das(
                decoded, plan, grid, geom, apod, sel[:, k : k + 1].copy(), ones
            )
            env += detect(part)
            clipped += part_clipped
        amp = env
    meta = {
        "scheme": plan.scheme,
        "compounding": compounding if plan.is_rtb else "coherent",
        "plane_positions": plan.plane_positions,
        "planes_per_image": plan.planes_per_image if plan.is_rtb else 1,
        "transmit_events_per_image": plan.transmit_events_per_image(),
        "effective_transmits_per_image": plan.effective_transmits_per_image(),
        "clipped_samples": clipped,
        "f_number": apod.f_number,
        "dynamic_range_db": dynamic_range_db,
    }
    return BeamformedVolume(grid, amp, env, log_compress(env, dynamic_range_db), meta)
