"""Point-scatterer forward model for Hadamard-encoded row-column transmits.

The simulator produces encoded channel RF for a walking-focus acquisition:
for every imaging plane, all columns fire simultaneously with +-1 bias signs
from a Hadamard row while the rows apply an elevational focusing delay, and
every column records the backscatter summed over its elements.

Because the transmit is linear in the bias signs, each plane is simulated
once per physical column and the encoded transmits are formed as exact
Hadamard combinations of those per-column responses. Decoding therefore
recovers the per-column responses up to floating-point rounding, which is
the property the test suite pins down against a brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .encoding import ENCODED, RfDataSet, encode, hadamard
from .geometry import ArrayGeometry, FocalConfig, elevational_focus_delays

__all__ = [
    "PulseSpec",
    "Cylinder",
    "Phantom",
    "TransmitPlan",
    "SCHEMES",
    "pulse",
    "make_wire_phantom",
    "make_cyst_phantom",
    "make_speckle_phantom",
    "required_time_span",
    "simulate_scheme",
]

SCHEMES = ("forces", "uforces", "forces_rtb", "uforces_rtb")


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian-enveloped cosine excitation.

    The envelope standard deviation follows from the -6 dB fractional
    bandwidth: the envelope spectrum is exp(-2 pi^2 sigma^2 f^2), so the
    half-amplitude full width equals fbw * f0 when
    sigma = sqrt(2 ln 2) / (pi * fbw * f0).

    The pulse is defined to be exactly zero beyond ``support_sigmas``
    standard deviations (about -69 dB at the default 4). A hard, documented
    cutoff makes every correct implementation produce identical samples,
    which keeps the encode/decode equivalence checks exact, and bounds the
    work per scatterer.
    """

    center_frequency: float
    fractional_bandwidth: float
    amplitude: float = 1.0
    support_sigmas: float = 4.0

    def __post_init__(self):
        if self.center_frequency <= 0:
            raise ValueError("center_frequency must be positive")
        if not (0.0 < self.fractional_bandwidth < 2.0):
            raise ValueError(
                f"fractional_bandwidth must be in (0, 2), got {self.fractional_bandwidth}"
            )
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.support_sigmas <= 0:
            raise ValueError("support_sigmas must be positive")

    @property
    def sigma(self) -> float:
        return math.sqrt(2.0 * math.log(2.0)) / (
            math.pi * self.fractional_bandwidth * self.center_frequency
        )

    @property
    def support(self) -> float:
        """Half-width of the temporal support in seconds."""
        return self.support_sigmas * self.sigma


def pulse(t, spec: PulseSpec):
    """Evaluate the excitation at time(s) ``t`` seconds from the pulse center.

    Accepts scalars or arrays; zero outside the pulse support.
    """
    t = np.asarray(t, dtype=np.float64)
    s = spec.sigma
    out = spec.amplitude * np.exp(-(t * t) / (2.0 * s * s)) * np.cos(
        2.0 * math.pi * spec.center_frequency * t
    )
    out = np.where(np.abs(t) <= spec.support, out, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Cylinder:
    """Axis-aligned cylinder of infinite extent, used as an anechoic region."""

    center: tuple[float, float, float]
    radius: float
    axis: str = "x"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be one of x, y, z, got {self.axis!r}")

    def contains(self, positions: np.ndarray) -> np.ndarray:
        """Boolean mask of points whose distance to the axis is <= radius."""
        p = np.atleast_2d(np.asarray(positions, dtype=np.float64))
        keep = [i for i, a in enumerate("xyz") if a != self.axis]
        c = np.asarray(self.center, dtype=np.float64)
        d2 = np.zeros(p.shape[0])
        for i in keep:
            d2 += (p[:, i] - c[i]) ** 2
        return d2 <= self.radius * self.radius


@dataclass
class Phantom:
    """Point scatterers plus declared anechoic regions.

    positions is (n, 3) with columns x, y, z; amplitudes is (n,). A phantom
    may be empty. No scatterer may lie inside an anechoic region.
    """

    positions: np.ndarray
    amplitudes: np.ndarray
    anechoic_regions: tuple[Cylinder, ...] = ()
    label: str = ""

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        a = np.asarray(self.amplitudes, dtype=np.float64).reshape(-1)
        if p.shape[0] != a.shape[0]:
            raise ValueError(
                f"{p.shape[0]} positions but {a.shape[0]} amplitudes"
            )
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(a))):
            raise ValueError("positions and amplitudes must be finite")
        for region in self.anechoic_regions:
            if p.shape[0] and region.contains(p).any():
                raise ValueError("scatterer inside an anechoic region")
        self.positions = p
        self.amplitudes = a

    @property
    def n_scatterers(self) -> int:
        return self.positions.shape[0]

    def merged_with(self, other: "Phantom") -> "Phantom":
        """Union of two phantoms (scatterers and anechoic regions)."""
        return Phantom(
            np.concatenate([self.positions, other.positions], axis=0),
            np.concatenate([self.amplitudes, other.amplitudes]),
            self.anechoic_regions + other.anechoic_regions,
            label=self.label or other.label,
        )


def make_wire_phantom(
    wire_ys, depth: float, x_extent: float, spacing: float, amplitude: float = 1.0
) -> Phantom:
    """Wires parallel to x at a common depth, one per entry of ``wire_ys``.

    Each wire is a row of point scatterers spanning ``x_extent`` symmetric
    about x = 0. The actual spacing is x_extent / ceil(x_extent / spacing),
    never larger than requested; pass spacing <= lambda/2 for a dense wire.
    A zero extent gives a single point per wire.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if x_extent < 0:
        raise ValueError(f"x_extent must be nonnegative, got {x_extent}")
    n_gaps = int(math.ceil(x_extent / spacing)) if x_extent > 0 else 0
    xs = np.linspace(-x_extent / 2.0, x_extent / 2.0, n_gaps + 1)
    ys = np.asarray(list(wire_ys), dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pos = np.column_stack(
        [gx.ravel(), gy.ravel(), np.full(gx.size, float(depth))]
    )
    return Phantom(pos, np.full(pos.shape[0], float(amplitude)), label="wires")


def make_speckle_phantom(
    cylinders,
    density: float,
    seed: int,
    bounds,
    amplitude_range=(0.5, 1.5),
) -> Phantom:
    """Uniform speckle in a box with anechoic cylinders carved out.

    The scatterer count is round(density * box volume). Positions are drawn
    uniformly in ``bounds`` ((x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi)) and
    any draw landing inside a cylinder is redrawn until it falls outside,
    so the count is preserved. Amplitudes are uniform in
    ``amplitude_range``. Fully deterministic for a fixed seed.
    """
    if density < 0:
        raise ValueError(f"density must be nonnegative, got {density}")
    cylinders = tuple(cylinders)
    (x0, x1), (y0, y1), (z0, z1) = [(float(a), float(b)) for a, b in bounds]
    if not (x1 >= x0 and y1 >= y0 and z1 >= z0):
        raise ValueError("bounds must satisfy lo <= hi on every axis")
    volume = (x1 - x0) * (y1 - y0) * (z1 - z0)
    n = int(round(density * volume))
    rng = np.random.default_rng(seed)
    lo = np.array([x0, y0, z0])
    hi = np.array([x1, y1, z1])
    pos = rng.uniform(lo, hi, size=(n, 3))
    amp = rng.uniform(amplitude_range[0], amplitude_range[1], size=n)
    if n:
        for _ in range(10_000):
            inside = np.zeros(n, dtype=bool)
            for cyl in cylinders:
                inside |= cyl.contains(pos)
            if not inside.any():
                break
            pos[inside] = rng.uniform(lo, hi, size=(int(inside.sum()), 3))
        else:
            raise ValueError("rejection sampling failed; cylinders nearly fill the bounds")
    return Phantom(pos, amp, anechoic_regions=cylinders, label="speckle")


def make_cyst_phantom(cylinder: Cylinder, speckle_density: float, seed: int, bounds) -> Phantom:
    """Speckle box with a single anechoic cylinder carved out."""
    return make_speckle_phantom([cylinder], speckle_density, seed, bounds)


@dataclass(frozen=True)
class TransmitPlan:
    """Acquisition and reconstruction plan shared by simulator and beamformer.

    scheme is one of "forces", "uforces", "forces_rtb", "uforces_rtb".
    plane_positions are the elevational positions of the walking focal
    planes, strictly increasing. hadamard_order must equal the column count
    of the array being driven. uforces_k is the reduced transmit count for
    the uforces variants (k transmits keep k - 1 decoded columns).
    planes_per_image is how many neighboring planes each retrospective
    transmit focused image compounds; fixed-focus schemes use 1.
    """

    scheme: str
    focal_depth: float
    plane_positions: tuple[float, ...]
    hadamard_order: int
    uforces_k: int = 0
    planes_per_image: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.focal_depth <= 0:
            raise ValueError("focal_depth must be positive")
        object.__setattr__(
            self, "plane_positions", tuple(float(y) for y in self.plane_positions)
        )
        if len(self.plane_positions) < 1:
            raise ValueError("need at least one plane position")
        if any(
            b <= a for a, b in zip(self.plane_positions, self.plane_positions[1:])
        ):
            raise ValueError("plane_positions must be strictly increasing")
        order = self.hadamard_order
        if order < 2 or (order & (order - 1)) != 0:
            raise ValueError(f"hadamard_order must be a power of two >= 2, got {order}")
        if self.planes_per_image < 1:
            raise ValueError("planes_per_image must be >= 1")
        if self.is_rtb and self.planes_per_image < 2:
            raise ValueError("retrospective transmit schemes need planes_per_image > 1")
        if self.is_uforces and not (2 <= self.uforces_k <= order):
            raise ValueError(
                f"uforces_k must be in [2, {order}], got {self.uforces_k}"
            )

    @property
    def is_rtb(self) -> bool:
        return self.scheme.endswith("_rtb")

    @property
    def is_uforces(self) -> bool:
        return self.scheme.startswith("uforces")

    def transmit_events_per_image(self) -> int:
        """Physical firings needed for one image; sets the frame rate."""
        per_plane = self.uforces_k if self.is_uforces else self.hadamard_order
        return per_plane * (self.planes_per_image if self.is_rtb else 1)

    def effective_transmits_per_image(self) -> int:
        """Decoded synthetic-aperture transmits contributing to one image."""
        per_plane = (self.uforces_k - 1) if self.is_uforces else self.hadamard_order
        return per_plane * (self.planes_per_image if self.is_rtb else 1)


def _scatterer_distances(geom: ArrayGeometry, positions: np.ndarray) -> np.ndarray:
    """Distances |element - scatterer| shaped (n_cols, n_scatterers, n_rows)."""
    sx, sy, sz = positions[:, 0], positions[:, 1], positions[:, 2]
    dx2 = (geom.col_xs()[:, None] - sx[None, :]) ** 2  # (C, S)
    dy2 = (geom.row_ys()[:, None] - sy[None, :]) ** 2  # (R, S)
    return np.sqrt(dx2[:, :, None] + dy2.T[None, :, :] + (sz * sz)[None, :, None])


def required_time_span(
    geom: ArrayGeometry, plan: TransmitPlan, phantom: Phantom, spec: PulseSpec
) -> float:
    """Smallest time span (seconds) that records the full round trip to
    every scatterer on every plane, trailing pulse support included."""
    if phantom.n_scatterers == 0:
        return 2.0 * spec.support
    worst = 0.0
    for plane_y in plan.plane_positions:
        focal = FocalConfig(plan.focal_depth, plane_y)
        delays = elevational_focus_delays(geom, focal)
        d = _scatterer_distances(geom, phantom.positions)
        tau_rx = d / geom.sound_speed
        tau_tx = tau_rx + delays[None, None, :]
        per_scat = tau_tx.max(axis=(0, 2)) + tau_rx.max(axis=(0, 2))
        worst = max(worst, float(per_scat.max()))
    return worst + spec.support


@njit(parallel=True, cache=True)
def _accumulate_columns(tau_tx, tau_rx, w, amps, inv2s2, omega, support, fs, out):
    """Accumulate per-column round trips: out[jt, jr, n] sums every
    (tx element of column jt, scatterer, rx element of column jr) path.

    The pulse is evaluated only inside its support window. Within the
    window, the Gaussian envelope and the carrier are advanced by exact
    per-sample recurrences (one multiply pair per sample instead of exp and
    cos calls), which keeps the kernel fast on scalar hardware.

    Each prange iteration owns the out[jt] slab, so results are identical
    for any thread count.
    """
    n_cols, n_scat, n_rows = tau_tx.shape
    n_samples = out.shape[2]
    dt = 1.0 / fs
    gauss_step = math.exp(-2.0 * dt * dt * inv2s2)
    cos_dt = math.cos(omega * dt)
    sin_dt = math.sin(omega * dt)
    for jt in prange(n_cols):
        for s in range(n_scat):
            a = amps[s]
            for it in range(n_rows):
                t_tx = tau_tx[jt, s, it]
                w_tx = w[jt, s, it] * a
                for jr in range(n_cols):
                    trace = out[jt, jr]
                    for ir in range(n_rows):
                        tau = t_tx + tau_rx[jr, s, ir]
                        ww = w_tx * w[jr, s, ir]
                        n0 = int(math.ceil((tau - support) * fs))
                        n1 = int(math.floor((tau + support) * fs))
                        if n0 < 0:
                            n0 = 0
                        if n1 > n_samples - 1:
                            n1 = n_samples - 1
                        if n1 < n0:
                            continue
                        u = n0 * dt - tau
                        g = math.exp(-u * u * inv2s2)
                        ratio = math.exp(-(2.0 * u * dt + dt * dt) * inv2s2)
                        c = math.cos(omega * u)
                        sn = math.sin(omega * u)
                        for n in range(n0, n1 + 1):
                            trace[n] += ww * g * c
                            c_next = c * cos_dt - sn * sin_dt
                            sn = sn * cos_dt + c * sin_dt
                            c = c_next
                            g *= ratio
                            ratio *= gauss_step


def _simulate_plane_columns(
    geom: ArrayGeometry,
    focal: FocalConfig,
    phantom: Phantom,
    spec: PulseSpec,
    n_samples: int,
) -> np.ndarray:
    """Per-column responses for one plane: (tx column, rx channel, sample)."""
    out = np.zeros((geom.n_cols, geom.n_cols, n_samples))
    if phantom.n_scatterers == 0:
        return out
    delays = elevational_focus_delays(geom, focal)
    d = _scatterer_distances(geom, phantom.positions)
    eps = geom.pitch / 10.0  # spreading floor, one per leg
    w = 1.0 / np.maximum(eps, d)
    tau_rx = d / geom.sound_speed
    tau_tx = tau_rx + delays[None, None, :]
    sigma = spec.sigma
    _accumulate_columns(
        tau_tx,
        tau_rx,
        w,
        phantom.amplitudes * spec.amplitude,
        1.0 / (2.0 * sigma * sigma),
        2.0 * math.pi * spec.center_frequency,
        spec.support,
        geom.sampling_rate,
        out,
    )
    return out


def simulate_scheme(
    geom: ArrayGeometry,
    plan: TransmitPlan,
    phantom: Phantom,
    spec: PulseSpec,
    time_span: float,
) -> RfDataSet:
    """Simulate the encoded acquisition for every plane of ``plan``.

    Every scheme shares the same encoded acquisition (reduced-transmit
    variants are emulated later by selecting decoded transmits), so the
    output depends on the plan only through its focal depth and plane
    positions. Receive channels are columns; channel j' sums its elements.

    Raises if ``time_span`` does not cover the longest round trip plus the
    pulse support.
    """
    if plan.hadamard_order != geom.n_cols:
        raise ValueError(
            f"hadamard_order {plan.hadamard_order} must equal n_cols {geom.n_cols}"
        )
    if time_span <= 0:
        raise ValueError("time_span must be positive")
    needed = required_time_span(geom, plan, phantom, spec)
    if time_span < needed:
        raise ValueError(
            f"time_span {time_span:.6e} s too short: need at least {needed:.6e} s "
            "to record the longest round trip plus pulse support"
        )
    fs = geom.sampling_rate
    n_samples = int(math.floor(time_span * fs)) + 1
    h = hadamard(plan.hadamard_order)
    n_planes = len(plan.plane_positions)
    per_column = np.zeros((n_planes, geom.n_cols, geom.n_cols, n_samples))
    for p, plane_y in enumerate(plan.plane_positions):
        focal = FocalConfig(plan.focal_depth, plane_y)
        per_column[p] = _simulate_plane_columns(geom, focal, phantom, spec, n_samples)
    encoded = encode(per_column, h)
    return RfDataSet(encoded, fs, state=ENCODED)
