"""Transport of generated droplets to the sampling point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrderingError
from .events import ARRIVAL, GENERATION, DropletEventSeries

# minimal separation used to break exact ties after sorting
TIE_EPS = 1e-9

# assumed mean droplet speed in the propagation channel (mm/s)
DEFAULT_FLOW_SPEED = 10.0


@dataclass(frozen=True)
class Geometry:
    """Flow-focusing chip dimensions in micrometres (metadata)."""

    main_width: float = 250.0
    neck_width: float = 100.0
    orifice_width: float = 50.0
    side_width: float = 80.0
    etch_depth: float = 15.0
    sampling_distance: float = 2850.0

    def __post_init__(self):
        for name in ("main_width", "neck_width", "orifice_width", "side_width", "etch_depth", "sampling_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def transit_delay(self, flow_speed_mm_s: float = DEFAULT_FLOW_SPEED) -> float:
        return self.sampling_distance * 1e-3 / flow_speed_mm_s


@dataclass(frozen=True)
class ChannelModel:
    transit_delay: float = Geometry().transit_delay()
    jitter_sigma: float = 0.0
    loss_prob: float = 0.0
    enforce_fifo: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if not self.transit_delay >= 0:
            raise ValueError("transit_delay must be >= 0")
        if not self.jitter_sigma >= 0:
            raise ValueError("jitter_sigma must be >= 0")
        if not 0 <= self.loss_prob < 1:
            raise ValueError("loss_prob must be in [0, 1)")

    @classmethod
    def from_geometry(cls, geometry: Geometry = Geometry(), flow_speed_mm_s: float = DEFAULT_FLOW_SPEED, **kw):
        return cls(transit_delay=geometry.transit_delay(flow_speed_mm_s), **kw)


def _make_strict(t: np.ndarray) -> np.ndarray:
    if t.size < 2 or np.all(np.diff(t) > 0):
        return t
    t = t.copy()
    for i in range(1, t.size):
        if t[i] <= t[i - 1]:
            t[i] = t[i - 1] + TIE_EPS
    return t


def perturbed_times(gen: DropletEventSeries, model: ChannelModel) -> np.ndarray:
    """Arrival times before ordering, in generation order, after loss."""
    ss = np.random.SeedSequence(model.rng_seed)
    loss_ss, jitter_ss = ss.spawn(2)
    t = gen.timestamps
    if model.loss_prob > 0:
        keep = np.random.default_rng(loss_ss).random(t.size) >= model.loss_prob
        t = t[keep]
    out = t + model.transit_delay
    if model.jitter_sigma > 0:
        rng = np.random.default_rng(jitter_ss)
        eps = rng.normal(0.0, model.jitter_sigma, size=t.size)
        out = out + eps
        # truncation by rejection: redraw any arrival that would be non-positive
        bad = out <= 0
        while np.any(bad):
            out[bad] = t[bad] + model.transit_delay + rng.normal(0.0, model.jitter_sigma, size=int(bad.sum()))
            bad = out <= 0
    return out


def propagate(gen: DropletEventSeries, model: ChannelModel = ChannelModel()) -> DropletEventSeries:
    """Map generation events to arrival events at the sampling point.

    With ``enforce_fifo`` the perturbed times are sorted (arrival order is all
    a downstream observer sees). Without it an overtake raises OrderingError.
    """
    if gen.origin != GENERATION:
        raise ValueError(f"propagate expects generation events, got origin={gen.origin!r}")
    out = perturbed_times(gen, model)
    if model.enforce_fifo:
        out = _make_strict(np.sort(out))
    elif out.size > 1 and np.any(np.diff(out) <= 0):
        i = int(np.flatnonzero(np.diff(out) <= 0)[0]) + 1
        raise OrderingError(f"droplet {i} overtakes its predecessor and enforce_fifo is off")
    return DropletEventSeries(out, ARRIVAL)
