"""Microdroplet FSK communication: simulator, modem and experiment harness."""

from .calibration import (
    CalibrationCurve,
    CalibrationPoint,
    OperatingRange,
    characterize_setpoint,
    default_curve,
    fit_affine_calibration,
    mean_frequency_at,
    variance_at,
)
from .channel import ChannelModel, Geometry, propagate
from .errors import (
    ConfigError,
    DropletFskError,
    FormatError,
    InsufficientDataError,
    OrderingError,
    ParseError,
    RangeError,
    StageError,
)
from .events import DropletEventSeries
from .harness import (
    ExperimentReport,
    ExperimentSpec,
    paper_spec,
    random_sequence,
    run_experiment,
    run_repetitions,
    sweep,
    symbol_error_rate,
)
from .modem import (
    ERASURE,
    PROFILES,
    FskConfig,
    classify,
    compute_thresholds,
    decode,
    encode,
    instantaneous_frequencies,
    smooth,
)
from .photodetect import IntensityTrace, PulseModel, SpikeDetectorParams, detect_spikes, synthesize_trace
from .transmitter import ControllerModel, GenJitterModel, PressureSchedule, generate_droplets, pressure_at

__version__ = "0.1.0"
