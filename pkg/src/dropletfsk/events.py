"""Droplet event series shared by the transmitter, channel, detector and modem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _csvio
from .errors import OrderingError

GENERATION = "generation"
ARRIVAL = "arrival"

EVENTS_HEADER = ("timestamp_s",)


@dataclass(frozen=True, eq=False)
class DropletEventSeries:
    """Strictly increasing, non-negative event timestamps in seconds."""

    timestamps: np.ndarray
    origin: str = GENERATION

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=float).reshape(-1)
        if self.origin not in (GENERATION, ARRIVAL):
            raise ValueError(f"origin must be {GENERATION!r} or {ARRIVAL!r}, got {self.origin!r}")
        if not np.all(np.isfinite(ts)):
            raise ValueError("timestamps must be finite")
        if ts.size and ts[0] < 0:
            raise OrderingError(f"timestamps must be >= 0, first is {ts[0]}")
        if ts.size > 1:
            bad = np.flatnonzero(np.diff(ts) <= 0)
            if bad.size:
                i = int(bad[0]) + 1
                raise OrderingError(
                    f"timestamps must be strictly increasing; index {i} ({ts[i]}) <= index {i - 1} ({ts[i - 1]})"
                )
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)

    def __len__(self):
        return self.timestamps.size

    def __eq__(self, other):
        if not isinstance(other, DropletEventSeries):
            return NotImplemented
        return self.origin == other.origin and np.array_equal(self.timestamps, other.timestamps)

    def shifted(self, dt: float) -> "DropletEventSeries":
        return DropletEventSeries(self.timestamps + dt, self.origin)


def read_events_csv(path, origin: str = ARRIVAL) -> DropletEventSeries:
    data = _csvio.read_numeric_csv(path, EVENTS_HEADER, allow_empty=True)
    return DropletEventSeries(data[:, 0], origin)


def write_events_csv(path, events: DropletEventSeries) -> None:
    _csvio.write_csv(path, EVENTS_HEADER, ([t] for t in events.timestamps))
