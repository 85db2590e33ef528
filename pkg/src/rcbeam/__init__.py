"""Encoded row-column synthetic aperture ultrasound at desk scale.

Simulates Hadamard bias-encoded transmits on a row-column array, decodes
them into effective single-column transmits, reconstructs fixed-focus and
retrospective-transmit-focused volumes, and measures the image quality
metrics used to compare the schemes.
"""

from .geometry import (
    ArrayGeometry,
    FocalConfig,
    Point3,
    element_position,
    elevational_focus_delays,
    path_length_forces,
    path_length_rtb,
    virtual_source_time_offset,
)
from .encoding import (
    HadamardMatrix,
    RfDataSet,
    bias_pattern,
    decode,
    encode,
    hadamard,
    select_uforces_subset,
    uforces_column_indices,
)
from .simulate import (
    SCHEMES,
    Cylinder,
    Phantom,
    PulseSpec,
    TransmitPlan,
    make_cyst_phantom,
    make_speckle_phantom,
    make_wire_phantom,
    pulse,
    required_time_span,
    simulate_scheme,
)
from .beamform import (
    ApodizationConfig,
    BeamformedVolume,
    ImageGrid,
    apodization_weight,
    beamform_volume,
    das_pixel,
    envelope,
    log_compress,
)
from .metrics import (
    FrameRate,
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
from .fileio import (
    FileFormatError,
    read_rf_file,
    read_volume_file,
    write_csv,
    write_pgm,
    write_rf_file,
    write_volume_file,
)
from .config import ConfigError, RunConfig, load_config, parse_config, serialize_config
from .parallel import set_thread_count
from .pipeline import PipelineError, STAGES, build_phantom, run_pipeline, scheme_plan

__version__ = "0.1.0"
