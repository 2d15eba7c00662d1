"""Pressure to droplet-frequency transfer characteristic.

A :class:`CalibrationCurve` stores characterized (pressure, mean frequency,
frequency variance) knots and interpolates linearly between them. Queries
outside the knot range raise :class:`~dropletfsk.errors.RangeError`; the
curve never extrapolates.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from . import _csvio
from .errors import InsufficientDataError, OrderingError, ParseError, RangeError
from .events import DropletEventSeries

CALIBRATION_HEADER = ("pressure_mbar", "mean_freq_hz", "freq_var_hz2")

PAPER_SYMBOL_PRESSURES = (217.5, 225.0, 232.5, 240.0)
PAPER_THRESHOLDS = (2.51, 4.05, 5.69)


@dataclass(frozen=True)
class OperatingRange:
    p_cont: float = 1200.0
    p_disp_min: float = 205.0
    p_disp_max: float = 250.0

    def __post_init__(self):
        if min(self.p_cont, self.p_disp_min, self.p_disp_max) <= 0:
            raise ValueError("operating pressures must be strictly positive")
        if not self.p_disp_min < self.p_disp_max:
            raise ValueError(f"p_disp_min ({self.p_disp_min}) must be < p_disp_max ({self.p_disp_max})")

    def contains(self, pressure: float) -> bool:
        return self.p_disp_min <= pressure <= self.p_disp_max


@dataclass(frozen=True)
class CalibrationPoint:
    pressure: float
    mean_freq: float
    freq_variance: float = 0.0

    def __post_init__(self):
        if not self.mean_freq > 0:
            raise ValueError(f"mean_freq must be > 0, got {self.mean_freq}")
        if not self.freq_variance >= 0:
            raise ValueError(f"freq_variance must be >= 0, got {self.freq_variance}")


@dataclass(frozen=True)
class CalibrationCurve:
    """Ordered calibration knots.

    If ``operating_range`` is given, every knot pressure must lie inside it.
    """

    points: tuple
    operating_range: OperatingRange | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise InsufficientDataError("calibration curve needs at least one point")
        object.__setattr__(self, "points", pts)
        p = self.pressures
        f = self.means
        if np.any(np.diff(p) <= 0):
            raise OrderingError("calibration pressures must be strictly increasing")
        if np.any(np.diff(f) <= 0):
            raise OrderingError("calibration mean frequency must increase strictly with pressure")
        if self.operating_range is not None:
            for pt in pts:
                if not self.operating_range.contains(pt.pressure):
                    raise RangeError(f"knot at {pt.pressure} mbar lies outside the operating range")

    @property
    def pressures(self) -> np.ndarray:
        return np.array([pt.pressure for pt in self.points], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.array([pt.mean_freq for pt in self.points], dtype=float)

    @property
    def variances(self) -> np.ndarray:
        return np.array([pt.freq_variance for pt in self.points], dtype=float)

    @property
    def p_min(self) -> float:
        return self.points[0].pressure

    @property
    def p_max(self) -> float:
        return self.points[-1].pressure

    @classmethod
    def from_arrays(cls, pressures, means, variances=None, operating_range=None):
        if variances is None:
            variances = np.zeros(len(pressures))
        if not len(pressures) == len(means) == len(variances):
            raise ValueError("pressures, means and variances must have equal length")
        pts = tuple(
            CalibrationPoint(float(p), float(f), float(v)) for p, f, v in zip(pressures, means, variances)
        )
        return cls(pts, operating_range)

    def with_variances(self, variances) -> "CalibrationCurve":
        return CalibrationCurve.from_arrays(self.pressures, self.means, variances, self.operating_range)


def _interp(curve: CalibrationCurve, pressure: float, values: np.ndarray) -> float:
    p = curve.pressures
    if not (p[0] <= pressure <= p[-1]):
        raise RangeError(
            f"pressure {pressure} mbar outside calibrated range [{p[0]}, {p[-1]}] mbar; extrapolation is not supported"
        )
    if p.size == 1:
        return float(values[0])
    return float(np.interp(pressure, p, values))


def mean_frequency_at(curve: CalibrationCurve, pressure: float) -> float:
    """Mean droplet frequency (Hz) at ``pressure`` (mbar), piecewise linear."""
    return _interp(curve, pressure, curve.means)


def variance_at(curve: CalibrationCurve, pressure: float) -> float:
    return max(_interp(curve, pressure, curve.variances), 0.0)


def characterize_setpoint(events) -> tuple[float, float]:
    """Mean and unbiased variance of per-interval frequencies ``1/(t_i - t_{i-1})``.

    ``events`` may be a :class:`DropletEventSeries` or a plain sequence of
    timestamps. At least three events (two intervals) are required.
    """
    if isinstance(events, DropletEventSeries):
        ts = events.timestamps
    else:
        ts = np.asarray(events, dtype=float).reshape(-1)
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise OrderingError("event timestamps must be strictly increasing")
    if ts.size < 3:
        raise InsufficientDataError(f"need >= 3 events to characterize a setpoint, got {ts.size}")
    freqs = 1.0 / np.diff(ts)
    return float(freqs.mean()), float(freqs.var(ddof=1))


def affine_midpoint_fit(pressures: Sequence[float], target_thresholds: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``(a, b)`` so that ``a*P + b`` hits each threshold at the
    midpoint between consecutive pressures."""
    p = np.asarray(pressures, dtype=float)
    t = np.asarray(target_thresholds, dtype=float)
    if p.size < 2:
        raise InsufficientDataError(f"need at least 2 pressures, got {p.size}")
    if t.size != p.size - 1:
        raise ValueError(f"expected {p.size - 1} thresholds for {p.size} pressures, got {t.size}")
    if np.any(np.diff(p) <= 0):
        raise OrderingError("pressures must be strictly increasing")
    steps = np.diff(p)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("pressures must be equally spaced")
    if np.any(np.diff(t) <= 0):
        raise OrderingError("target thresholds must be strictly increasing")
    mids = 0.5 * (p[:-1] + p[1:])
    design = np.column_stack([mids, np.ones_like(mids)])
    (a, b), *_ = np.linalg.lstsq(design, t, rcond=None)
    return float(a), float(b)


def fit_affine_calibration(pressures, target_thresholds, operating_range=None) -> CalibrationCurve:
    """Reconstruct per-symbol mean frequencies from published midpoint thresholds.

    The returned curve has one knot per pressure, zero variance. A non-positive
    fitted slope cannot form a valid curve and raises OrderingError.
    """
    a, b = affine_midpoint_fit(pressures, target_thresholds)
    p = np.asarray(pressures, dtype=float)
    means = a * p + b
    if a <= 0 or np.any(means <= 0):
        raise OrderingError(f"affine fit (a={a:.4g}, b={b:.4g}) does not give positive increasing frequencies")
    return CalibrationCurve.from_arrays(p, means, operating_range=operating_range)


def read_calibration_csv(path) -> CalibrationCurve:
    data = _csvio.read_numeric_csv(path, CALIBRATION_HEADER)
    p = data[:, 0]
    for i in range(1, p.size):
        if p[i] <= p[i - 1]:
            kind = "duplicate" if p[i] == p[i - 1] else "unsorted"
            raise ParseError(f"{kind} pressure {p[i]} (pressures must be strictly ascending)", line=i + 2)
    try:
        return CalibrationCurve.from_arrays(p, data[:, 1], data[:, 2])
    except ValueError as exc:
        raise ParseError(f"invalid calibration data: {exc}") from exc


def write_calibration_csv(path, curve: CalibrationCurve) -> None:
    rows = ((pt.pressure, pt.mean_freq, pt.freq_variance) for pt in curve.points)
    _csvio.write_csv(path, CALIBRATION_HEADER, rows)


def default_curve() -> CalibrationCurve:
    """Shipped calibration reconstructed from the published 4-FSK thresholds."""
    ref = resources.files("dropletfsk").joinpath("data/default_calibration.csv")
    with resources.as_file(ref) as path:
        return read_calibration_csv(path)
