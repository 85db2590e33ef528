"""Pipeline orchestration: simulate -> decode -> beamform -> metrics.

Every stage reads its inputs from the artifacts the previous stage wrote,
even when stages run back to back, so rerunning a later stage in isolation
is exactly equivalent to an end-to-end run.

Artifacts, all inside the configured output directory:
    encoded.rcrf            encoded channel data
    decoded.rcrf            decoded (per-column) channel data
    volume_<scheme>.rcbv    linear envelope per scheme
    bscan_<scheme>.pgm      central B-scan, log compressed
    fwhm.csv                elevational width per wire and scheme
    gcnr.csv                contrast per region and scheme
    summary.csv             per-scheme transmit counts and frame rates
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .beamform import BeamformedVolume, ImageGrid, beamform_volume, log_compress
from .config import CystsSpec, PointsSpec, RunConfig, WiresSpec
from .encoding import decode, hadamard, select_uforces_subset
from .fileio import (
    FileFormatError,
    read_rf_file,
    read_volume_file,
    write_csv,
    write_pgm,
    write_rf_file,
    write_volume_file,
)
from .geometry import ArrayGeometry
from .metrics import (
    UnmeasurableProfile,
    RegionSamples,
    disk_region_samples,
    effective_elevational_pitch,
    elevational_profile,
    expected_fwhm,
    frame_rate,
    fwhm,
    gcnr,
)
from .parallel import set_thread_count
from .simulate import (
    Cylinder,
    Phantom,
    TransmitPlan,
    make_speckle_phantom,
    make_wire_phantom,
    required_time_span,
    simulate_scheme,
)

__all__ = ["STAGES", "PipelineError", "run_pipeline", "build_phantom", "scheme_plan"]

STAGES = ("simulate", "decode", "beamform", "metrics")

ENCODED_FILE = "encoded.rcrf"
DECODED_FILE = "decoded.rcrf"


class PipelineError(RuntimeError):
    """A stage failed; ``stage`` names it for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def build_phantom(cfg: RunConfig) -> Phantom:
    """Materialize the configured phantom (seeded for speckle)."""
    spec = cfg.phantom
    if isinstance(spec, WiresSpec):
        phantom = None
        for g in spec.groups:
            part = make_wire_phantom(g.ys, g.depth, g.x_extent, g.spacing, g.amplitude)
            phantom = part if phantom is None else phantom.merged_with(part)
        return phantom
    if isinstance(spec, CystsSpec):
        cylinders = [Cylinder(c.center, c.radius, c.axis) for c in spec.cylinders]
        return make_speckle_phantom(
            cylinders, spec.density, cfg.seed, spec.bounds, spec.amplitude_range
        )
    if isinstance(spec, PointsSpec):
        return Phantom(np.array(spec.positions), np.array(spec.amplitudes))
    raise ValueError(f"unsupported phantom spec {type(spec).__name__}")


def scheme_plan(cfg: RunConfig, scheme: str) -> TransmitPlan:
    acq = cfg.acquisition
    is_rtb = scheme.endswith("_rtb")
    return TransmitPlan(
        scheme=scheme,
        focal_depth=acq.focal_depth,
        plane_positions=acq.plane_positions(),
        hadamard_order=cfg.geometry.n_cols,
        uforces_k=acq.uforces_k,
        planes_per_image=acq.planes_per_image if is_rtb else 1,
    )


def _acquisition_plan(cfg: RunConfig) -> TransmitPlan:
    # The encoded acquisition is scheme independent; simulate it once.
    return TransmitPlan(
        scheme="forces",
        focal_depth=cfg.acquisition.focal_depth,
        plane_positions=cfg.acquisition.plane_positions(),
        hadamard_order=cfg.geometry.n_cols,
        planes_per_image=1,
    )


def scheme_grid(cfg: RunConfig, scheme: str) -> ImageGrid:
    """Reconstruction grid for a scheme.

    Fixed-focus schemes image each acquisition plane at its own elevation,
    so their grid's y axis is the plane raster; the configured y axis
    applies to the retrospective transmit schemes.
    """
    g = cfg.grid.to_image_grid()
    if scheme.endswith("_rtb"):
        return g
    acq = cfg.acquisition
    return ImageGrid(
        g.x0, acq.plane_start, g.z0, g.dx, acq.plane_step, g.dz, g.nx, acq.plane_count, g.nz
    )


def _require(path: Path, stage: str, producer: str) -> Path:
    if not path.exists():
        raise PipelineError(
            stage, f"missing input {path}; run the '{producer}' stage first"
        )
    return path


def _stage_simulate(cfg: RunConfig, out: Path) -> None:
    phantom = build_phantom(cfg)
    plan = _acquisition_plan(cfg)
    span = cfg.time_span
    if span is None:
        needed = required_time_span(cfg.geometry, plan, phantom, cfg.pulse)
        span = needed + 2.0 / cfg.geometry.sampling_rate
    rf = simulate_scheme(cfg.geometry, plan, phantom, cfg.pulse, span)
    write_rf_file(out / ENCODED_FILE, rf)


def _stage_decode(cfg: RunConfig, out: Path) -> None:
    rf = read_rf_file(_require(out / ENCODED_FILE, "decode", "simulate"))
    decoded = decode(rf, hadamard(rf.transmits))
    write_rf_file(out / DECODED_FILE, decoded)


def _stage_beamform(cfg: RunConfig, out: Path) -> None:
    decoded = read_rf_file(_require(out / DECODED_FILE, "beamform", "decode"))
    for scheme in cfg.schemes:
        plan = scheme_plan(cfg, scheme)
        data = (
            select_uforces_subset(decoded, plan.uforces_k)
            if plan.is_uforces
            else decoded
        )
        grid = scheme_grid(cfg, scheme)
        vol = beamform_volume(
            data,
            plan,
            grid,
            cfg.geometry,
            cfg.apodization,
            dynamic_range_db=cfg.beamforming.dynamic_range_db,
            compounding=cfg.beamforming.compounding,
        )
        write_volume_file(out / f"volume_{scheme}.rcbv", grid, vol.envelope)
        iy = int(np.argmin(np.abs(grid.ys())))
        write_pgm(
            out / f"bscan_{scheme}.pgm",
            vol.envelope_db[:, iy, :].T,
            cfg.beamforming.dynamic_range_db,
        )


def _load_volumes(cfg: RunConfig, out: Path):
    volumes = {}
    for scheme in cfg.schemes:
        path = _require(out / f"volume_{scheme}.rcbv", "metrics", "beamform")
        volumes[scheme] = read_volume_file(path)
    return volumes


def _fwhm_rows(cfg: RunConfig, volumes) -> list[list]:
    rows = []
    spec = cfg.phantom
    if cfg.metrics.fwhm is None or not isinstance(spec, WiresSpec):
        return rows
    x_at = cfg.metrics.fwhm.x
    focal = cfg.acquisition.focal_depth
    for g in spec.groups:
        for y in g.ys:
            row = [y, g.depth, abs(g.depth - focal)]
            for scheme in cfg.schemes:
                grid, env = volumes[scheme]
                try:
                    width = fwhm(elevational_profile(grid, env, x_at, g.depth))
                except UnmeasurableProfile:
                    width = math.nan
                row.append(width)
            rows.append(row)
    return rows


def _gcnr_rows(cfg: RunConfig, volumes) -> list[list]:
    rows = []
    gc = cfg.metrics.gcnr
    if gc is None:
        return rows
    focal = cfg.acquisition.focal_depth
    for region in gc.regions:
        row = [region.label, abs(region.inside.z - focal)]
        for scheme in cfg.schemes:
            grid, env = volumes[scheme]
            inside = disk_region_samples(
                grid, env, region.inside.y, region.inside.z, region.inside.radius,
                gc.x_halfspan,
            )
            outside = np.concatenate(
                [
                    disk_region_samples(grid, env, o.y, o.z, o.radius, gc.x_halfspan)
                    for o in region.outside
                ]
            )
            row.append(gcnr(RegionSamples(inside, outside), gc.bins))
        rows.append(row)
    return rows


def _stage_metrics(cfg: RunConfig, out: Path) -> dict:
    volumes = _load_volumes(cfg, out)
    geom = cfg.geometry
    acq = cfg.acquisition

    fwhm_rows = _fwhm_rows(cfg, volumes)
    if fwhm_rows:
        header = ["wire_y_m", "wire_depth_m", "distance_from_focus_m"] + [
            f"fwhm_{s}_m" for s in cfg.schemes
        ]
        write_csv(out / "fwhm.csv", header, fwhm_rows)

    gcnr_rows = _gcnr_rows(cfg, volumes)
    if gcnr_rows:
        header = ["region", "distance_from_focus_m"] + [f"gcnr_{s}" for s in cfg.schemes]
        write_csv(out / "gcnr.csv", header, gcnr_rows)

    pitch_lambda = effective_elevational_pitch(
        acq.plane_step, geom.sound_speed, geom.center_frequency
    )
    beam_width = expected_fwhm(geom.wavelength, cfg.apodization.f_number)
    summary_rows = []
    for scheme in cfg.schemes:
        plan = scheme_plan(cfg, scheme)
        events = plan.transmit_events_per_image()
        rate = frame_rate(events, acq.prf)
        summary_rows.append(
            [
                scheme,
                events,
                plan.effective_transmits_per_image(),
                rate.frames_per_second,
                rate.exact,
                pitch_lambda,
                beam_width,
            ]
        )
    header = [
        "scheme",
        "transmit_events_per_image",
        "effective_transmits_per_image",
        "frames_per_second",
        "exact_frames_per_second",
        "plane_pitch_wavelengths",
        "expected_fwhm_m",
    ]
    write_csv(out / "summary.csv", header, summary_rows)

    for row in summary_rows:
        print(
            f"{row[0]}: {row[1]} transmit events/image, "
            f"{row[2]} effective transmits, {row[3]} fps (exact {row[4]:g})"
        )
    return {
        "fwhm": fwhm_rows,
        "gcnr": gcnr_rows,
        "summary": summary_rows,
    }


_STAGE_FUNCS = {
    "simulate": _stage_simulate,
    "decode": _stage_decode,
    "beamform": _stage_beamform,
    "metrics": _stage_metrics,
}


def run_pipeline(cfg: RunConfig, stages="all") -> dict:
    """Run the requested stages in canonical order; returns the metric
    tables (empty when the metrics stage is not requested).

    Raises PipelineError with the failing stage attached.
    """
    if stages == "all":
        selected = STAGES
    elif isinstance(stages, str):
        selected = (stages,)
    else:
        selected = tuple(stages)
    for s in selected:
        if s not in STAGES:
            raise PipelineError(s, f"unknown stage {s!r}; expected one of {STAGES}")
    set_thread_count(cfg.threads)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = {}
    for stage in STAGES:
        if stage not in selected:
            continue
        try:
            ret = _STAGE_FUNCS[stage](cfg, out)
        except PipelineError:
            raise
        except (ValueError, FileFormatError, OSError) as e:
            raise PipelineError(stage, str(e)) from e
        if stage == "metrics":
            result = ret
    return result
