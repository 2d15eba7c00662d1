"""Pressure schedule, lagged controller and renewal droplet generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _csvio
from .calibration import CalibrationCurve, OperatingRange, mean_frequency_at
from .errors import ConfigError, OrderingError, RangeError
from .events import GENERATION, DropletEventSeries, read_events_csv, write_events_csv  # noqa: F401

SCHEDULE_HEADER = ("start_time_s", "setpoint_mbar")

# slack for floating accumulation of intervals at the end of a schedule
_END_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class PressureSchedule:
    setpoints: np.ndarray
    start_times: np.ndarray
    total_duration: float
    operating_range: OperatingRange | None = None

    def __post_init__(self):
        sp = np.array(self.setpoints, dtype=float).reshape(-1)
        st = np.array(self.start_times, dtype=float).reshape(-1)
        if sp.size != st.size:
            raise ValueError("setpoints and start_times must have equal length")
        if st.size:
            if st[0] != 0:
                raise OrderingError(f"first segment must start at 0, got {st[0]}")
            if np.any(np.diff(st) <= 0):
                raise OrderingError("segment start times must be strictly increasing")
            if self.total_duration < st[-1]:
                raise ValueError("total_duration ends before the last segment starts")
        elif self.total_duration != 0:
            raise ValueError("an empty schedule has zero duration")
        if self.operating_range is not None:
            for p in sp:
                if not self.operating_range.contains(p):
                    raise RangeError(f"setpoint {p} mbar outside operating range")
        sp.setflags(write=False)
        st.setflags(write=False)
        object.__setattr__(self, "setpoints", sp)
        object.__setattr__(self, "start_times", st)
        object.__setattr__(self, "total_duration", float(self.total_duration))

    def __len__(self):
        return self.setpoints.size

    def __eq__(self, other):
        if not isinstance(other, PressureSchedule):
            return NotImplemented
        return (
            np.array_equal(self.setpoints, other.setpoints)
            and np.array_equal(self.start_times, other.start_times)
            and self.total_duration == other.total_duration
        )

    @property
    def segments(self) -> list[tuple[float, float]]:
        return [(float(p), float(t)) for p, t in zip(self.setpoints, self.start_times)]


@dataclass(frozen=True)
class ControllerModel:
    """First-order lag between commanded and delivered pressure.

    ``initial_pressure=None`` means the line already sits at the first setpoint.
    """

    time_constant_tau: float = 1.0
    initial_pressure: float | None = None

    def __post_init__(self):
        if not self.time_constant_tau >= 0:
            raise ValueError(f"time_constant_tau must be >= 0, got {self.time_constant_tau}")


@dataclass(frozen=True)
class GenJitterModel:
    """Gamma-distributed inter-droplet intervals with a fixed coefficient of variation."""

    mode: str = "none"
    coefficient_of_variation: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "interval-cv"):
            raise ValueError(f"unknown jitter mode {self.mode!r}")
        if not 0 <= self.coefficient_of_variation < 1:
            raise ValueError("coefficient_of_variation must be in [0, 1)")

    @property
    def cv(self) -> float:
        return self.coefficient_of_variation if self.mode == "interval-cv" else 0.0


class PressureTrajectory:
    """Precomputed piecewise step response for fast repeated queries."""

    def __init__(self, schedule: PressureSchedule, controller: ControllerModel):
        self.schedule = schedule
        self.tau = controller.time_constant_tau
        sp = schedule.setpoints
        st = schedule.start_times
        p0 = np.empty_like(sp)
        if sp.size:
            prev = sp[0] if controller.initial_pressure is None else float(controller.initial_pressure)
            for k in range(sp.size):
                p0[k] = prev
                if k + 1 < sp.size:
                    prev = self._response(sp[k], prev, st[k + 1] - st[k])
        self.entry_pressures = p0

    def _response(self, p_set, p_entry, elapsed):
        if self.tau == 0:
            return float(p_set)
        with np.errstate(over="ignore"):
            decay = math.exp(-float(np.float64(elapsed) / self.tau))
        return float(p_set + (p_entry - p_set) * decay)

    def __call__(self, t: float) -> float:
        sched = self.schedule
        if not sched.setpoints.size:
            raise RangeError("empty schedule has no pressure")
        if not (0 <= t <= sched.total_duration):
            raise RangeError(f"t={t} s outside schedule [0, {sched.total_duration}] s")
        k = int(np.searchsorted(sched.start_times, t, side="right")) - 1
        return self._response(sched.setpoints[k], self.entry_pressures[k], t - sched.start_times[k])


def pressure_at(schedule: PressureSchedule, controller: ControllerModel, t: float) -> float:
    """Delivered pressure (mbar) at time ``t`` under a first-order lag."""
    return PressureTrajectory(schedule, controller)(t)


def generate_droplets(
    schedule: PressureSchedule,
    controller: ControllerModel,
    curve: CalibrationCurve,
    jitter: GenJitterModel = GenJitterModel(),
) -> DropletEventSeries:
    """Renewal process of droplet generation times.

    Each interval's mean is the reciprocal calibrated frequency at the
    pressure present when the interval starts. With a non-zero CV the
    interval is Gamma distributed with that mean.
    """
    if not len(schedule):
        return DropletEventSeries(np.empty(0), GENERATION)
    traj = PressureTrajectory(schedule, controller)
    duration = schedule.total_duration
    cv = jitter.cv
    if cv < 1e-12:
        # Gamma shape 1/cv^2 overflows; the distribution is a point mass anyway
        cv = 0.0
    rng = np.random.default_rng(jitter.rng_seed)
    shape = 1.0 / cv**2 if cv > 0 else 0.0

    out = []
    block = np.empty(0)
    j = 0
    t = 0.0
    while True:
        p = traj(min(t, duration))
        try:
            mu = 1.0 / mean_frequency_at(curve, p)
        except RangeError as exc:
            raise RangeError(f"at t={t:.6g} s: {exc}") from exc
        if cv > 0:
            if j == block.size:
                # unit-mean Gamma draws, scaled by the local mean interval
                block = rng.gamma(shape, 1.0 / shape, size=1024)
                j = 0
            t = t + mu * block[j]
            j += 1
        else:
            t = t + mu
        if t > duration + _END_SLACK:
            break
        out.append(t)
    return DropletEventSeries(np.asarray(out), GENERATION)


def read_schedule_csv(path, total_duration: float | None = None) -> PressureSchedule:
    """Read ``start_time_s,setpoint_mbar``.

    Without ``total_duration`` the last segment is given the mean length of
    the preceding ones (or 0 s for a single segment).
    """
    data = _csvio.read_numeric_csv(path, SCHEDULE_HEADER)
    st, sp = data[:, 0], data[:, 1]
    if total_duration is None:
        if st.size > 1:
            total_duration = st[-1] + (st[-1] - st[0]) / (st.size - 1)
        else:
            raise ConfigError("single-segment schedule needs an explicit total duration")
    return PressureSchedule(sp, st, total_duration)


def write_schedule_csv(path, schedule: PressureSchedule) -> None:
    _csvio.write_csv(path, SCHEDULE_HEADER, zip(schedule.start_times, schedule.setpoints))
