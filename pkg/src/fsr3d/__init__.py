"""Simulation of a dynamically non-regular sampling video sensor and
frequency-selective reconstruction of the resulting volumes."""

from .config import FsrConfig, parse_config_file
from .estimators import FrequencySelectiveReconstructor, NonRegularSampler
from .evaluation import (PsnrReport, append_report, baseline_fill, emit_report,
                         psnr_volume, read_report)
from .model import (
    DegenerateAreaError,
    FrequencyPrior,
    ModelTrace,
    ReconstructionArea,
    build_area,
    decay_weight,
    effective_data,
    frequency_prior,
    generate_model,
    generate_model_spatial_oracle,
)
from .reconstruct import plan_order, reconstruct
from .sampling import (
    ReadoutSchedule,
    SamplingMode,
    apply_mask,
    build_mask,
    gen_label_grid,
    hash_counter,
    load_labels,
    make_schedule,
    save_labels,
)
from .volume import (
    VolumeError,
    VolumeHeader,
    crop_borders,
    load_mask,
    load_raw,
    load_volume,
    quantize,
    save_mask,
    save_raw,
    save_volume,
)

__version__ = "0.1.0"

__all__ = [
    "FsrConfig",
    "parse_config_file",
    "FrequencySelectiveReconstructor",
    "NonRegularSampler",
    "PsnrReport",
    "append_report",
    "baseline_fill",
    "emit_report",
    "psnr_volume",
    "read_report",
    "DegenerateAreaError",
    "FrequencyPrior",
    "ModelTrace",
    "ReconstructionArea",
    "build_area",
    "decay_weight",
    "effective_data",
    "frequency_prior",
    "generate_model",
    "generate_model_spatial_oracle",
    "plan_order",
    "reconstruct",
    "ReadoutSchedule",
    "SamplingMode",
    "apply_mask",
    "build_mask",
    "gen_label_grid",
    "hash_counter",
    "load_labels",
    "make_schedule",
    "save_labels",
    "VolumeError",
    "VolumeHeader",
    "crop_borders",
    "load_mask",
    "load_raw",
    "load_volume",
    "quantize",
    "save_mask",
    "save_raw",
    "save_volume",
    "__version__",
]
