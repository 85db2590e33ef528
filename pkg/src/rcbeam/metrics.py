"""Image quality metrics: wire-profile FWHM, gCNR, frame-rate accounting,
lateral resolution estimate, and the elevational sampling pitch."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamform import ImageGrid

__all__ = [
    "Profile",
    "RegionSamples",
    "FrameRate",
    "UnmeasurableProfile",
    "fwhm",
    "expected_fwhm",
    "gcnr",
    "frame_rate",
    "effective_elevational_pitch",
    "elevational_profile",
    "disk_region_samples",
]


class UnmeasurableProfile(ValueError):
    """The profile does not bracket a half-maximum width."""


@dataclass
class Profile:
    """Sampled 1-D curve: strictly increasing coordinates, nonnegative values."""

    coordinates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coordinates, dtype=np.float64).reshape(-1)
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if c.size != v.size:
            raise ValueError(f"{c.size} coordinates but {v.size} values")
        if c.size and np.any(np.diff(c) <= 0):
            raise ValueError("coordinates must be strictly increasing")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(v))):
            raise ValueError("profile entries must be finite")
        if v.size and v.min() < 0:
            raise ValueError("values must be nonnegative")
        self.coordinates = c
        self.values = v


@dataclass
class RegionSamples:
    """Envelope samples inside a target region and in the background."""

    inside: np.ndarray
    outside: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.inside, dtype=np.float64).reshape(-1)
        o = np.asarray(self.outside, dtype=np.float64).reshape(-1)
        if i.size == 0 or o.size == 0:
            raise ValueError("both regions must be nonempty")
        if not (np.all(np.isfinite(i)) and np.all(np.isfinite(o))):
            raise ValueError("samples must be finite")
        self.inside = i
        self.outside = o


@dataclass(frozen=True)
class FrameRate:
    """Headline integer rate plus the exact ratio it came from."""

    frames_per_second: int
    exact: float


def _cross(x0, v0, x1, v1, level):
    # linear interpolation of the level crossing between two samples
    return x0 + (level - v0) * (x1 - x0) / (v1 - v0)


def fwhm(p: Profile) -> float:
    """Width between the two half-maximum crossings adjacent to the unique
    global peak, located by linear interpolation.

    Crossings belonging to secondary lobes are ignored; only the first
    crossing on each side of the peak counts. Raises UnmeasurableProfile
    when the peak is at the boundary, is not unique, or a crossing is not
    bracketed within the profile.
    """
    v = p.values
    x = p.coordinates
    if v.size < 3:
        raise UnmeasurableProfile("need at least 3 samples")
    peak = int(np.argmax(v))
    vmax = v[peak]
    if vmax <= 0:
        raise UnmeasurableProfile("profile has no positive peak")
    if int((v == vmax).sum()) != 1:
        raise UnmeasurableProfile("global maximum is not unique")
    if peak in (0, v.size - 1):
        raise UnmeasurableProfile("peak lies on the profile boundary")
    half = 0.5 * vmax
    left = None
    for i in range(peak - 1, -1, -1):
        if v[i] <= half:
            left = _cross(x[i], v[i], x[i + 1], v[i + 1], half)
            break
    right = None
    for i in range(peak + 1, v.size):
        if v[i] <= half:
            right = _cross(x[i - 1], v[i - 1], x[i], v[i], half)
            break
    if left is None or right is None:
        raise UnmeasurableProfile("half maximum is not crossed on both sides")
    return float(right - left)


def expected_fwhm(wavelength: float, f_number: float) -> float:
    """Diffraction-limited beam width estimate: 1.4 * wavelength * f_number."""
    if wavelength <= 0 or f_number <= 0:
        raise ValueError("wavelength and f_number must be positive")
    return 1.4 * wavelength * f_number


def gcnr(r: RegionSamples, bins: int = 100) -> float:
    """Generalized contrast-to-noise ratio: 1 minus the overlap of the two
    regions' histograms over a shared range.

    0 means statistically indistinguishable regions, 1 means perfectly
    separable. Degenerate input (every sample equal) returns 0.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    lo = min(r.inside.min(), r.outside.min())
    hi = max(r.inside.max(), r.outside.max())
    if lo == hi:
        return 0.0
    p_in, _ = np.histogram(r.inside, bins=bins, range=(lo, hi))
    p_out, _ = np.histogram(r.outside, bins=bins, range=(lo, hi))
    # compare counts cross-scaled by the opposite region's size and divide
    # once at the end: the sum stays in exact integer arithmetic, so
    # identical regions give exactly 0 and disjoint ones exactly 1
    n_in = r.inside.size
    n_out = r.outside.size
    overlap = int(np.minimum(p_in * n_out, p_out * n_in).sum()) / (n_in * n_out)
    return float(min(max(1.0 - overlap, 0.0), 1.0))


def frame_rate(transmits_per_image: int, prf: float) -> FrameRate:
    """Frames per second at a given pulse repetition frequency.

    The headline value is the exact ratio prf / transmits_per_image rounded
    to the nearest integer (the convention that reproduces the reference
    transmit-count table); the exact ratio is returned alongside.
    """
    if transmits_per_image <= 0 or prf <= 0:
        raise ValueError("transmits_per_image and prf must be positive")
    exact = prf / transmits_per_image
    return FrameRate(int(math.floor(exact + 0.5)), exact)


def effective_elevational_pitch(
    plane_spacing: float, sound_speed: float, frequency: float
) -> float:
    """Elevational sampling pitch in wavelengths: spacing / (c / f)."""
    if plane_spacing <= 0 or sound_speed <= 0 or frequency <= 0:
        raise ValueError("all inputs must be positive")
    return plane_spacing * frequency / sound_speed


def _nearest_index(axis: np.ndarray, value: float) -> int:
    return int(np.argmin(np.abs(axis - value)))


def elevational_profile(
    grid: ImageGrid, env: np.ndarray, x: float, z: float
) -> Profile:
    """Envelope along y at the grid column nearest (x, z)."""
    ix = _nearest_index(grid.xs(), x)
    iz = _nearest_index(grid.zs(), z)
    return Profile(grid.ys(), env[ix, :, iz])


def disk_region_samples(
    grid: ImageGrid,
    env: np.ndarray,
    center_y: float,
    center_z: float,
    radius: float,
    x_halfspan: float,
    center_x: float = 0.0,
) -> np.ndarray:
    """Envelope samples from a disk in the y-z plane swept along x.

    Collects voxels with (y - center_y)^2 + (z - center_z)^2 <= radius^2
    and |x - center_x| <= x_halfspan. Raises when the region catches no
    voxels.
    """
    xs, ys, zs = grid.xs(), grid.ys(), grid.zs()
    mx = np.abs(xs - center_x) <= x_halfspan
    disk = (ys[:, None] - center_y) ** 2 + (zs[None, :] - center_z) ** 2 <= radius**2
    if not mx.any() or not disk.any():
        raise ValueError("region selects no voxels")
    samples = env[mx][:, disk]
    return samples.ravel()
