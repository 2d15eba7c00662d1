"""Optical intensity traces at the sampling point.

Simulation direction: arrivals -> Gaussian spikes on a baseline plus white
noise. Receiver direction: trace -> peak times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _csvio
from .errors import FormatError, RangeError
from .events import ARRIVAL, DropletEventSeries

TRACE_HEADER = ("time_s", "intensity")

DEFAULT_SAMPLE_RATE = 100.0

# pulses are evaluated out to this many widths; exp(-50) is below double eps
_PULSE_HALF_SPAN = 10.0


@dataclass(frozen=True, eq=False)
class IntensityTrace:
    sample_rate: float
    start_time: float
    samples: np.ndarray

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).reshape(-1)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if x.size < 1:
            raise ValueError("a trace needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("trace samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate


@dataclass(frozen=True)
class PulseModel:
    amplitude: float = 1.0
    width_sigma: float = 0.01
    baseline: float = 0.0
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be > 0")
        if not self.width_sigma > 0:
            raise ValueError("width_sigma must be > 0")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class SpikeDetectorParams:
    threshold: float = 0.5
    min_separation: float = 0.035

    def __post_init__(self):
        if not self.min_separation >= 0:
            raise ValueError("min_separation must be >= 0")

    @classmethod
    def for_pulse(cls, pulse: PulseModel, min_separation: float | None = None):
        """Half-amplitude threshold; refractory interval 3.5 pulse widths.

        The refractory interval must stay below the closest expected pulse
        spacing minus two samples of peak quantization.
        """
        if min_separation is None:
            min_separation = 3.5 * pulse.width_sigma
        return cls(pulse.baseline + pulse.amplitude / 2, min_separation)


def synthesize_trace(
    arrivals: DropletEventSeries,
    pulse: PulseModel = PulseModel(),
    sample_rate: float = DEFAULT_SAMPLE_RATE,
    duration: float | None = None,
) -> IntensityTrace:
    """Sample ``baseline + sum_i A exp(-(t - t_i)^2 / 2 s^2) + noise`` on [0, duration]."""
    ts = arrivals.timestamps
    if duration is None:
        duration = float(ts[-1]) if ts.size else 0.0
    if ts.size and ts[-1] > duration:
        raise RangeError(f"duration {duration} s ends before last arrival at {ts[-1]} s")
    n = int(np.floor(duration * sample_rate + 1e-9)) + 1
    x = np.full(n, float(pulse.baseline))
    if ts.size:
        half = int(np.ceil(_PULSE_HALF_SPAN * pulse.width_sigma * sample_rate))
        offsets = np.arange(-half, half + 1)
        centers = np.rint(ts * sample_rate).astype(np.int64)
        idx = centers[:, None] + offsets[None, :]
        valid = (idx >= 0) & (idx < n)
        tk = idx / sample_rate
        contrib = pulse.amplitude * np.exp(-((tk - ts[:, None]) ** 2) / (2 * pulse.width_sigma**2))
        np.add.at(x, idx[valid], contrib[valid])
    if pulse.noise_sigma > 0:
        x += np.random.default_rng(pulse.rng_seed).normal(0.0, pulse.noise_sigma, size=n)
    return IntensityTrace(sample_rate, 0.0, x)


def local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices of local maxima. A flat-topped peak reports its first sample;
    an end sample counts when it beats its single neighbour."""
    starts = np.flatnonzero(np.r_[True, x[1:] != x[:-1]])
    vals = x[starts]
    if vals.size == 1:
        # a constant trace has no peak
        return np.empty(0, dtype=np.int64)
    up = np.r_[True, vals[1:] > vals[:-1]]
    down = np.r_[vals[:-1] > vals[1:], True]
    return starts[up & down]


def detect_spikes(trace: IntensityTrace, params: SpikeDetectorParams = SpikeDetectorParams()) -> DropletEventSeries:
    """Peak times above ``threshold``; earliest-first suppression within ``min_separation``."""
    x = trace.samples
    cand = local_maxima(x)
    cand = cand[x[cand] > params.threshold]
    times = trace.times[cand]
    kept = []
    last = -np.inf
    for t in times:
        if t - last >= params.min_separation or not kept:
            kept.append(t)
            last = t
    return DropletEventSeries(np.asarray(kept), ARRIVAL)


def read_trace_csv(path, rel_tol: float = 1e-6) -> IntensityTrace:
    """Read ``time_s,intensity`` and validate uniform sampling."""
    data = _csvio.read_numeric_csv(path, TRACE_HEADER)
    t, x = data[:, 0], data[:, 1]
    if t.size < 2:
        raise FormatError("trace needs at least two samples to infer the sample rate", line=2)
    steps = np.diff(t)
    dt = float(np.median(steps))
    if not dt > 0:
        raise FormatError("trace timestamps must increase", line=3)
    bad = np.flatnonzero(np.abs(steps - dt) > rel_tol * dt)
    if bad.size:
        i = int(bad[0]) + 1
        raise FormatError(f"non-uniform sampling at sample index {i} (t={t[i]})", line=i + 2)
    return IntensityTrace(1.0 / dt, float(t[0]), x)


def write_trace_csv(path, trace: IntensityTrace) -> None:
    _csvio.write_csv(path, TRACE_HEADER, zip(trace.times, trace.samples))
