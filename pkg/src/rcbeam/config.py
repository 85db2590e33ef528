"""Run configuration: YAML parsing with strict validation, defaults, and
round-trip serialization.

Diagnostics are split into three kinds, each naming the offending location:
missing required keys, unknown keys, and invalid values (which includes
domain invariant violations raised by the constructed objects).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .beamform import ApodizationConfig, ImageGrid
from .geometry import ArrayGeometry
from .simulate import SCHEMES, PulseSpec

__all__ = [
    "ConfigError",
    "RunConfig",
    "AxisSpec",
    "GridSpec",
    "AcquisitionConfig",
    "BeamformingConfig",
    "WireGroup",
    "WiresSpec",
    "CylinderSpec",
    "CystsSpec",
    "PointsSpec",
    "DiskSpec",
    "GcnrRegionSpec",
    "GcnrSpec",
    "FwhmSpec",
    "MetricsSpec",
    "parse_config",
    "load_config",
    "serialize_config",
    "config_to_dict",
]


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending key path."""


@dataclass(frozen=True)
class AxisSpec:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.count < 1:
            raise ValueError("count must be >= 1")


@dataclass(frozen=True)
class GridSpec:
    x: AxisSpec
    y: AxisSpec
    z: AxisSpec

    def to_image_grid(self) -> ImageGrid:
        return ImageGrid(
            self.x.start,
            self.y.start,
            self.z.start,
            self.x.step,
            self.y.step,
            self.z.step,
            self.x.count,
            self.y.count,
            self.z.count,
        )


@dataclass(frozen=True)
class AcquisitionConfig:
    """Walking-focus acquisition: focal depth and the plane raster."""

    focal_depth: float
    plane_start: float
    plane_step: float
    plane_count: int
    planes_per_image: int = 1
    uforces_k: int = 0
    prf: float = 4000.0

    def __post_init__(self):
        if self.focal_depth <= 0:
            raise ValueError("focal_depth must be positive")
        if self.plane_step <= 0:
            raise ValueError("plane_step must be positive")
        if self.plane_count < 1:
            raise ValueError("plane_count must be >= 1")
        if self.planes_per_image < 1:
            raise ValueError("planes_per_image must be >= 1")
        if self.prf <= 0:
            raise ValueError("prf must be positive")

    def plane_positions(self) -> tuple[float, ...]:
        return tuple(
            self.plane_start + i * self.plane_step for i in range(self.plane_count)
        )


@dataclass(frozen=True)
class BeamformingConfig:
    dynamic_range_db: float = 60.0
    compounding: str = "coherent"

    def __post_init__(self):
        if self.dynamic_range_db <= 0:
            raise ValueError("dynamic_range_db must be positive")
        if self.compounding not in ("coherent", "incoherent"):
            raise ValueError("compounding must be coherent or incoherent")


@dataclass(frozen=True)
class WireGroup:
    ys: tuple[float, ...]
    depth: float
    x_extent: float
    spacing: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class WiresSpec:
    groups: tuple[WireGroup, ...]
    kind: str = "wires"


@dataclass(frozen=True)
class CylinderSpec:
    center: tuple[float, float, float]
    radius: float
    axis: str = "x"


@dataclass(frozen=True)
class CystsSpec:
    cylinders: tuple[CylinderSpec, ...]
    density: float
    bounds: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    amplitude_range: tuple[float, float] = (0.5, 1.5)
    kind: str = "cysts"


@dataclass(frozen=True)
class PointsSpec:
    positions: tuple[tuple[float, float, float], ...]
    amplitudes: tuple[float, ...]
    kind: str = "points"


@dataclass(frozen=True)
class DiskSpec:
    y: float
    z: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class GcnrRegionSpec:
    label: str
    inside: DiskSpec
    outside: tuple[DiskSpec, ...]


@dataclass(frozen=True)
class GcnrSpec:
    x_halfspan: float
    regions: tuple[GcnrRegionSpec, ...]
    bins: int = 100

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.x_halfspan <= 0:
            raise ValueError("x_halfspan must be positive")
        if not self.regions:
            raise ValueError("at least one region is required")


@dataclass(frozen=True)
class FwhmSpec:
    x: float = 0.0


@dataclass(frozen=True)
class MetricsSpec:
    fwhm: FwhmSpec | None = None
    gcnr: GcnrSpec | None = None


@dataclass(frozen=True)
class RunConfig:
    geometry: ArrayGeometry
    pulse: PulseSpec
    acquisition: AcquisitionConfig
    phantom: object
    grid: GridSpec
    schemes: tuple[str, ...] = SCHEMES
    apodization: ApodizationConfig = field(default_factory=ApodizationConfig)
    beamforming: BeamformingConfig = field(default_factory=BeamformingConfig)
    metrics: MetricsSpec = field(default_factory=MetricsSpec)
    output_dir: str = "out"
    seed: int = 0
    threads: int = 0
    time_span: float | None = None


_MISSING = object()


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"invalid value at '{path}': expected a mapping")
    return dict(node)


def _sequence(node, path: str) -> list:
    if not isinstance(node, list):
        raise ConfigError(f"invalid value at '{path}': expected a list")
    return node


def _pop(d: dict, key: str, path: str, default=_MISSING):
    if key in d:
        return d.pop(key)
    if default is _MISSING:
        raise ConfigError(f"missing required key '{_join(path, key)}'")
    return default


def _reject_unknown(d: dict, path: str):
    if d:
        key = sorted(d)[0]
        raise ConfigError(f"unknown key '{_join(path, key)}'")


def _float(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"invalid value at '{path}': expected a number, got {v!r}")
    return float(v)


def _int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"invalid value at '{path}': expected an integer, got {v!r}")
    return v


def _str(v, path: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"invalid value at '{path}': expected a string, got {v!r}")
    return v


def _float_pair(v, path: str) -> tuple[float, float]:
    seq = _sequence(v, path)
    if len(seq) != 2:
        raise ConfigError(f"invalid value at '{path}': expected two numbers")
    return (_float(seq[0], path), _float(seq[1], path))


def _float_triple(v, path: str) -> tuple[float, float, float]:
    seq = _sequence(v, path)
    if len(seq) != 3:
        raise ConfigError(f"invalid value at '{path}': expected three numbers")
    return tuple(_float(s, path) for s in seq)


def _build(cls, path: str, /, **kwargs):
    """Construct a validated object, rewording invariant violations."""
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(f"invalid value in '{path}': {e}") from e


def _parse_geometry(node, path):
    d = _mapping(node, path)
    kwargs = dict(
        n_rows=_int(_pop(d, "n_rows", path), _join(path, "n_rows")),
        n_cols=_int(_pop(d, "n_cols", path), _join(path, "n_cols")),
        pitch=_float(_pop(d, "pitch", path), _join(path, "pitch")),
        center_frequency=_float(
            _pop(d, "center_frequency", path), _join(path, "center_frequency")
        ),
        sampling_rate=_float(
            _pop(d, "sampling_rate", path), _join(path, "sampling_rate")
        ),
        sound_speed=_float(_pop(d, "sound_speed", path), _join(path, "sound_speed")),
    )
    _reject_unknown(d, path)
    return _build(ArrayGeometry, path, **kwargs)


def _parse_pulse(node, path, center_frequency):
    d = _mapping(node, path)
    kwargs = dict(
        center_frequency=center_frequency,
        fractional_bandwidth=_float(
            _pop(d, "fractional_bandwidth", path), _join(path, "fractional_bandwidth")
        ),
        amplitude=_float(_pop(d, "amplitude", path, 1.0), _join(path, "amplitude")),
        support_sigmas=_float(
            _pop(d, "support_sigmas", path, 4.0), _join(path, "support_sigmas")
        ),
    )
    _reject_unknown(d, path)
    return _build(PulseSpec, path, **kwargs)


def _parse_acquisition(node, path):
    d = _mapping(node, path)
    kwargs = dict(
        focal_depth=_float(_pop(d, "focal_depth", path), _join(path, "focal_depth")),
        plane_start=_float(_pop(d, "plane_start", path), _join(path, "plane_start")),
        plane_step=_float(_pop(d, "plane_step", path), _join(path, "plane_step")),
        plane_count=_int(_pop(d, "plane_count", path), _join(path, "plane_count")),
        planes_per_image=_int(
            _pop(d, "planes_per_image", path, 1), _join(path, "planes_per_image")
        ),
        uforces_k=_int(_pop(d, "uforces_k", path, 0), _join(path, "uforces_k")),
        prf=_float(_pop(d, "prf", path, 4000.0), _join(path, "prf")),
    )
    _reject_unknown(d, path)
    return _build(AcquisitionConfig, path, **kwargs)


def _parse_axis(node, path):
    d = _mapping(node, path)
    kwargs = dict(
        start=_float(_pop(d, "start", path), _join(path, "start")),
        step=_float(_pop(d, "step", path), _join(path, "step")),
        count=_int(_pop(d, "count", path), _join(path, "count")),
    )
    _reject_unknown(d, path)
    return _build(AxisSpec, path, **kwargs)


def _parse_grid(node, path):
    d = _mapping(node, path)
    x = _parse_axis(_pop(d, "x", path), _join(path, "x"))
    y = _parse_axis(_pop(d, "y", path), _join(path, "y"))
    z = _parse_axis(_pop(d, "z", path), _join(path, "z"))
    _reject_unknown(d, path)
    return GridSpec(x, y, z)


def _parse_wires(d, path):
    groups = []
    raw = _sequence(_pop(d, "wires", path), _join(path, "wires"))
    if not raw:
        raise ConfigError(f"invalid value at '{_join(path, 'wires')}': needs at least one group")
    for i, node in enumerate(raw):
        gpath = f"{_join(path, 'wires')}[{i}]"
        g = _mapping(node, gpath)
        ys = tuple(
            _float(v, _join(gpath, "ys"))
            for v in _sequence(_pop(g, "ys", gpath), _join(gpath, "ys"))
        )
        if not ys:
            raise ConfigError(f"invalid value at '{_join(gpath, 'ys')}': needs at least one y")
        group = WireGroup(
            ys=ys,
            depth=_float(_pop(g, "depth", gpath), _join(gpath, "depth")),
            x_extent=_float(_pop(g, "x_extent", gpath), _join(gpath, "x_extent")),
            spacing=_float(_pop(g, "spacing", gpath), _join(gpath, "spacing")),
            amplitude=_float(_pop(g, "amplitude", gpath, 1.0), _join(gpath, "amplitude")),
        )
        _reject_unknown(g, gpath)
        groups.append(group)
    return WiresSpec(groups=tuple(groups))


def _parse_cysts(d, path):
    raw = _sequence(_pop(d, "cylinders", path), _join(path, "cylinders"))
    if not raw:
        raise ConfigError(
            f"invalid value at '{_join(path, 'cylinders')}': needs at least one cylinder"
        )
    cylinders = []
    for i, node in enumerate(raw):
        cpath = f"{_join(path, 'cylinders')}[{i}]"
        c = _mapping(node, cpath)
        axis = _str(_pop(c, "axis", cpath, "x"), _join(cpath, "axis"))
        if axis not in ("x", "y", "z"):
            raise ConfigError(f"invalid value at '{_join(cpath, 'axis')}': must be x, y, or z")
        radius = _float(_pop(c, "radius", cpath), _join(cpath, "radius"))
        if radius <= 0:
            raise ConfigError(f"invalid value at '{_join(cpath, 'radius')}': must be positive")
        cylinders.append(
            CylinderSpec(
                center=_float_triple(_pop(c, "center", cpath), _join(cpath, "center")),
                radius=radius,
                axis=axis,
            )
        )
        _reject_unknown(c, cpath)
    bpath = _join(path, "bounds")
    b = _mapping(_pop(d, "bounds", path), bpath)
    bounds = tuple(
        _float_pair(_pop(b, ax, bpath), _join(bpath, ax)) for ax in ("x", "y", "z")
    )
    _reject_unknown(b, bpath)
    for ax, (lo, hi) in zip("xyz", bounds):
        if hi < lo:
            raise ConfigError(f"invalid value at '{_join(bpath, ax)}': lo must be <= hi")
    density = _float(_pop(d, "density", path), _join(path, "density"))
    if density < 0:
        raise ConfigError(f"invalid value at '{_join(path, 'density')}': must be nonnegative")
    amp_range = _float_pair(
        _pop(d, "amplitude_range", path, [0.5, 1.5]), _join(path, "amplitude_range")
    )
    return CystsSpec(
        cylinders=tuple(cylinders), density=density, bounds=bounds, amplitude_range=amp_range
    )


def _parse_points(d, path):
    raw = _sequence(_pop(d, "points", path), _join(path, "points"))
    if not raw:
        raise ConfigError(f"invalid value at '{_join(path, 'points')}': needs at least one point")
    positions, amplitudes = [], []
    for i, node in enumerate(raw):
        ppath = f"{_join(path, 'points')}[{i}]"
        p = _mapping(node, ppath)
        positions.append(
            _float_triple(_pop(p, "position", ppath), _join(ppath, "position"))
        )
        amplitudes.append(_float(_pop(p, "amplitude", ppath, 1.0), _join(ppath, "amplitude")))
        _reject_unknown(p, ppath)
    return PointsSpec(positions=tuple(positions), amplitudes=tuple(amplitudes))


def _parse_phantom(node, path):
    d = _mapping(node, path)
    kind = _str(_pop(d, "kind", path), _join(path, "kind"))
    if kind == "wires":
        spec = _parse_wires(d, path)
    elif kind == "cysts":
        spec = _parse_cysts(d, path)
    elif kind == "points":
        spec = _parse_points(d, path)
    else:
        raise ConfigError(
            f"invalid value at '{_join(path, 'kind')}': must be wires, cysts, or points"
        )
    _reject_unknown(d, path)
    return spec


def _parse_disk(node, path):
    d = _mapping(node, path)
    kwargs = dict(
        y=_float(_pop(d, "y", path), _join(path, "y")),
        z=_float(_pop(d, "z", path), _join(path, "z")),
        radius=_float(_pop(d, "radius", path), _join(path, "radius")),
    )
    _reject_unknown(d, path)
    return _build(DiskSpec, path, **kwargs)


def _parse_metrics(node, path):
    d = _mapping(node, path)
    fwhm_spec = None
    if "fwhm" in d:
        fpath = _join(path, "fwhm")
        f = _mapping(_pop(d, "fwhm", path), fpath)
        fwhm_spec = FwhmSpec(x=_float(_pop(f, "x", fpath, 0.0), _join(fpath, "x")))
        _reject_unknown(f, fpath)
    gcnr_spec = None
    if "gcnr" in d:
        gpath = _join(path, "gcnr")
        g = _mapping(_pop(d, "gcnr", path), gpath)
        regions = []
        raw = _sequence(_pop(g, "regions", gpath), _join(gpath, "regions"))
        for i, rnode in enumerate(raw):
            rpath = f"{_join(gpath, 'regions')}[{i}]"
            r = _mapping(rnode, rpath)
            label = _str(_pop(r, "label", rpath, f"region{i}"), _join(rpath, "label"))
            inside = _parse_disk(_pop(r, "inside", rpath), _join(rpath, "inside"))
            onodes = _sequence(_pop(r, "outside", rpath), _join(rpath, "outside"))
            if not onodes:
                raise ConfigError(
                    f"invalid value at '{_join(rpath, 'outside')}': needs at least one disk"
                )
            outside = tuple(
                _parse_disk(n, f"{_join(rpath, 'outside')}[{j}]")
                for j, n in enumerate(onodes)
            )
            _reject_unknown(r, rpath)
            regions.append(GcnrRegionSpec(label=label, inside=inside, outside=outside))
        kwargs = dict(
            x_halfspan=_float(_pop(g, "x_halfspan", gpath), _join(gpath, "x_halfspan")),
            regions=tuple(regions),
            bins=_int(_pop(g, "bins", gpath, 100), _join(gpath, "bins")),
        )
        _reject_unknown(g, gpath)
        gcnr_spec = _build(GcnrSpec, gpath, **kwargs)
    _reject_unknown(d, path)
    return MetricsSpec(fwhm=fwhm_spec, gcnr=gcnr_spec)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid value at '': not parseable YAML ({e})") from e
    root = _mapping(doc if doc is not None else {}, "")
    geometry = _parse_geometry(_pop(root, "geometry", ""), "geometry")
    pulse = _parse_pulse(_pop(root, "pulse", ""), "pulse", geometry.center_frequency)
    acquisition = _parse_acquisition(_pop(root, "acquisition", ""), "acquisition")
    phantom = _parse_phantom(_pop(root, "phantom", ""), "phantom")
    grid = _parse_grid(_pop(root, "grid", ""), "grid")

    raw_schemes = _pop(root, "schemes", "", list(SCHEMES))
    schemes = tuple(
        _str(s, f"schemes[{i}]") for i, s in enumerate(_sequence(raw_schemes, "schemes"))
    )
    if not schemes:
        raise ConfigError("invalid value at 'schemes': needs at least one scheme")
    for i, s in enumerate(schemes):
        if s not in SCHEMES:
            raise ConfigError(
                f"invalid value at 'schemes[{i}]': {s!r} is not one of {SCHEMES}"
            )

    apath = "apodization"
    a = _mapping(_pop(root, apath, "", {}), apath)
    apod = _build(
        ApodizationConfig,
        apath,
        f_number=_float(_pop(a, "f_number", apath, 1.0), _join(apath, "f_number")),
    )
    _reject_unknown(a, apath)

    bpath = "beamforming"
    b = _mapping(_pop(root, bpath, "", {}), bpath)
    beamforming = _build(
        BeamformingConfig,
        bpath,
        dynamic_range_db=_float(
            _pop(b, "dynamic_range_db", bpath, 60.0), _join(bpath, "dynamic_range_db")
        ),
        compounding=_str(
            _pop(b, "compounding", bpath, "coherent"), _join(bpath, "compounding")
        ),
    )
    _reject_unknown(b, bpath)

    metrics = _parse_metrics(_pop(root, "metrics", "", {}), "metrics")
    output_dir = _str(_pop(root, "output_dir", "", "out"), "output_dir")
    seed = _int(_pop(root, "seed", "", 0), "seed")
    threads = _int(_pop(root, "threads", "", 0), "threads")
    time_span = _pop(root, "time_span", "", None)
    if time_span is not None:
        time_span = _float(time_span, "time_span")
        if time_span <= 0:
            raise ConfigError("invalid value at 'time_span': must be positive")
    _reject_unknown(root, "")

    cfg = RunConfig(
        geometry=geometry,
        pulse=pulse,
        acquisition=acquisition,
        phantom=phantom,
        grid=grid,
        schemes=schemes,
        apodization=apod,
        beamforming=beamforming,
        metrics=metrics,
        output_dir=output_dir,
        seed=seed,
        threads=threads,
        time_span=time_span,
    )
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: RunConfig):
    uses_uforces = any(s.startswith("uforces") for s in cfg.schemes)
    if uses_uforces and not (2 <= cfg.acquisition.uforces_k <= cfg.geometry.n_cols):
        raise ConfigError(
            "invalid value at 'acquisition.uforces_k': must be in "
            f"[2, {cfg.geometry.n_cols}] when a uforces scheme is requested"
        )
    uses_rtb = any(s.endswith("_rtb") for s in cfg.schemes)
    if uses_rtb and cfg.acquisition.planes_per_image < 2:
        raise ConfigError(
            "invalid value at 'acquisition.planes_per_image': must be > 1 "
            "when a retrospective transmit scheme is requested"
        )


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _phantom_to_dict(spec) -> dict:
    if isinstance(spec, WiresSpec):
        return {
            "kind": "wires",
            "wires": [
                {
                    "ys": list(g.ys),
                    "depth": g.depth,
                    "x_extent": g.x_extent,
                    "spacing": g.spacing,
                    "amplitude": g.amplitude,
                }
                for g in spec.groups
            ],
        }
    if isinstance(spec, CystsSpec):
        return {
            "kind": "cysts",
            "cylinders": [
                {"center": list(c.center), "radius": c.radius, "axis": c.axis}
                for c in spec.cylinders
            ],
            "density": spec.density,
            "bounds": {ax: list(b) for ax, b in zip("xyz", spec.bounds)},
            "amplitude_range": list(spec.amplitude_range),
        }
    if isinstance(spec, PointsSpec):
        return {
            "kind": "points",
            "points": [
                {"position": list(p), "amplitude": a}
                for p, a in zip(spec.positions, spec.amplitudes)
            ],
        }
    raise TypeError(f"unsupported phantom spec {type(spec).__name__}")


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-structure mirror of the config; parse(serialize(cfg)) == cfg."""
    g = cfg.geometry
    d = {
        "geometry": {
            "n_rows": g.n_rows,
            "n_cols": g.n_cols,
            "pitch": g.pitch,
            "center_frequency": g.center_frequency,
            "sampling_rate": g.sampling_rate,
            "sound_speed": g.sound_speed,
        },
        "pulse": {
            "fractional_bandwidth": cfg.pulse.fractional_bandwidth,
            "amplitude": cfg.pulse.amplitude,
            "support_sigmas": cfg.pulse.support_sigmas,
        },
        "acquisition": {
            "focal_depth": cfg.acquisition.focal_depth,
            "plane_start": cfg.acquisition.plane_start,
            "plane_step": cfg.acquisition.plane_step,
            "plane_count": cfg.acquisition.plane_count,
            "planes_per_image": cfg.acquisition.planes_per_image,
            "uforces_k": cfg.acquisition.uforces_k,
            "prf": cfg.acquisition.prf,
        },
        "schemes": list(cfg.schemes),
        "phantom": _phantom_to_dict(cfg.phantom),
        "grid": {
            ax: {"start": a.start, "step": a.step, "count": a.count}
            for ax, a in (("x", cfg.grid.x), ("y", cfg.grid.y), ("z", cfg.grid.z))
        },
        "apodization": {"f_number": cfg.apodization.f_number},
        "beamforming": {
            "dynamic_range_db": cfg.beamforming.dynamic_range_db,
            "compounding": cfg.beamforming.compounding,
        },
        "output_dir": cfg.output_dir,
        "seed": cfg.seed,
        "threads": cfg.threads,
    }
    m = {}
    if cfg.metrics.fwhm is not None:
        m["fwhm"] = {"x": cfg.metrics.fwhm.x}
    if cfg.metrics.gcnr is not None:
        gc = cfg.metrics.gcnr
        m["gcnr"] = {
            "x_halfspan": gc.x_halfspan,
            "bins": gc.bins,
            "regions": [
                {
                    "label": r.label,
                    "inside": {"y": r.inside.y, "z": r.inside.z, "radius": r.inside.radius},
                    "outside": [
                        {"y": o.y, "z": o.z, "radius": o.radius} for o in r.outside
                    ],
                }
                for r in gc.regions
            ],
        }
    if m:
        d["metrics"] = m
    if cfg.time_span is not None:
        d["time_span"] = cfg.time_span
    return d


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
