"""Array geometry: element coordinates, elevational focusing delays, and
round-trip path lengths for row-column (crossed-electrode) arrays.

Conventions used throughout the package: x is azimuthal, y is elevational,
z is depth. The element grid lies in the z = 0 plane and is centered on the
origin. Columns run along y (constant x), rows run along x (constant y).
All quantities are SI (meters, seconds, Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "Point3",
    "FocalConfig",
    "element_position",
    "path_length_forces",
    "path_length_rtb",
    "elevational_focus_delays",
    "virtual_source_time_offset",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Row-column array description plus the acoustic constants.

    Parameters
    ----------
    n_rows, n_cols : int
        Element counts along y (rows) and x (columns). At least 2 each.
    pitch : float
        Element spacing in meters, identical in x and y.
    center_frequency : float
        Excitation center frequency in Hz.
    sampling_rate : float
        Receive sampling rate in Hz. Must be at least 4x center_frequency
        so that linear interpolation between samples stays accurate.
    sound_speed : float
        Speed of sound in m/s.
    """

    n_rows: int
    n_cols: int
    pitch: float
    center_frequency: float
    sampling_rate: float
    sound_speed: float

    def __post_init__(self):
        if self.n_rows < 2 or self.n_cols < 2:
            raise ValueError(
                f"need at least a 2x2 grid, got {self.n_rows}x{self.n_cols}"
            )
        if self.pitch <= 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if self.center_frequency <= 0:
            raise ValueError("center_frequency must be positive")
        if self.sampling_rate < 4.0 * self.center_frequency:
            raise ValueError(
                "sampling_rate must be at least 4x center_frequency "
                f"({self.sampling_rate} < 4*{self.center_frequency})"
            )
        if self.sound_speed <= 0:
            raise ValueError("sound_speed must be positive")

    @property
    def wavelength(self) -> float:
        return self.sound_speed / self.center_frequency

    def row_ys(self) -> np.ndarray:
        """Elevational coordinate of each row, centered on the origin."""
        return (np.arange(self.n_rows) - (self.n_rows - 1) / 2.0) * self.pitch

    def col_xs(self) -> np.ndarray:
        """Azimuthal coordinate of each column, centered on the origin."""
        return (np.arange(self.n_cols) - (self.n_cols - 1) / 2.0) * self.pitch


@dataclass(frozen=True)
class Point3:
    """A point in the array coordinate frame (x azimuth, y elevation, z depth)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y}, {self.z})")


@dataclass(frozen=True)
class FocalConfig:
    """Elevational transmit focus: depth of the focal line and the
    elevational position of the imaging plane it belongs to."""

    focal_depth: float
    plane_y: float = 0.0

    def __post_init__(self):
        if self.focal_depth <= 0:
            raise ValueError(f"focal_depth must be positive, got {self.focal_depth}")


def _dist(ax, ay, az, bx, by, bz) -> float:
    return math.sqrt((ax - bx) ** 2 + (ay - by) ** 2 + (az - bz) ** 2)


def element_position(geom: ArrayGeometry, row: int, col: int) -> Point3:
    """Center of the element at (row, col), grid centered on the origin at z = 0."""
    if not (0 <= row < geom.n_rows):
        raise IndexError(f"row {row} out of range [0, {geom.n_rows})")
    if not (0 <= col < geom.n_cols):
        raise IndexError(f"col {col} out of range [0, {geom.n_cols})")
    x = (col - (geom.n_cols - 1) / 2.0) * geom.pitch
    y = (row - (geom.n_rows - 1) / 2.0) * geom.pitch
    return Point3(x, y, 0.0)


def path_length_forces(px: Point3, tx: Point3, rx: Point3) -> float:
    """Round-trip distance for a fixed-focus transmit treated as a point
    source at ``tx``: transmit leg plus receive leg.

    Symmetric in tx and rx, and never shorter than the tx-rx separation.
    """
    return _dist(px.x, px.y, px.z, tx.x, tx.y, tx.z) + _dist(
        rx.x, rx.y, rx.z, px.x, px.y, px.z
    )


def path_length_rtb(
    px: Point3, tx_col_x: float, plane_y: float, rx: Point3, f_dist: float
) -> float:
    """Round-trip distance through a virtual source placed on the
    elevational focal arc.

    The effective transmit is a single column at azimuth ``tx_col_x``; its
    focal arc has radius ``f_dist`` in the x-z slice at elevation
    ``plane_y``. The transmit leg is the distance from the array to the arc
    plus the distance from the arc to the pixel, signed by whether the
    pixel lies beyond or short of the arc.

    Parameters
    ----------
    px : Point3
        Pixel position.
    tx_col_x : float
        Azimuthal position of the effective transmitting column.
    plane_y : float
        Elevational position of the transmit plane's focal arc.
    rx : Point3
        Receive element position.
    f_dist : float
        Focal arc radius (elevational focal depth), > 0.
    """
    if f_dist <= 0:
        raise ValueError(f"f_dist must be positive, got {f_dist}")
    r_inplane = math.hypot(tx_col_x - px.x, px.z)
    r_tx = math.hypot(r_inplane - f_dist, plane_y - px.y)
    sign = 1.0 if r_inplane >= f_dist else -1.0
    return _dist(px.x, px.y, px.z, rx.x, rx.y, rx.z) + f_dist + sign * r_tx


def elevational_focus_delays(geom: ArrayGeometry, focal: FocalConfig) -> np.ndarray:
    """Per-row firing delays (seconds) that focus the transmit on the line
    at elevation ``focal.plane_y`` and depth ``focal.focal_depth``.

    Delays are shifted so the earliest row fires at 0; the row closest to
    the focal plane fires last.
    """
    d = np.hypot(focal.focal_depth, geom.row_ys() - focal.plane_y)
    return (d.max() - d) / geom.sound_speed


def virtual_source_time_offset(geom: ArrayGeometry, focal: FocalConfig) -> float:
    """Time between the first row firing and the instant the converging
    wavefront passes through the focal arc.

    With the nonnegative-delay convention of :func:`elevational_focus_delays`
    the wavefront reaches the focus at ``max(d)/c``, so a virtual source on
    the arc emits at ``(max(d) - f_dist)/c``. Beamformers add this offset to
    ``path_length/c`` when indexing received samples.
    """
    d = np.hypot(focal.focal_depth, geom.row_ys() - focal.plane_y)
    return float((d.max() - focal.focal_depth) / geom.sound_speed)
