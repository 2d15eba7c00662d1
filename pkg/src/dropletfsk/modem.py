"""M-ary droplet-frequency FSK: mapping, thresholds, estimation and decisions."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _csvio
from .calibration import PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS
from .errors import ConfigError, OrderingError
from .events import DropletEventSeries
from .transmitter import PressureSchedule

ERASURE = -1

DECODED_HEADER = ("window_index", "midpoint_time_s", "decision_freq_hz", "symbol")


@dataclass(frozen=True)
class FskConfig:
    """Alphabet, symbol pressures, decision thresholds and receiver timing.

    ``detection_window=None`` means one symbol interval.
    """

    m: int = 4
    symbol_pressures: tuple = PAPER_SYMBOL_PRESSURES
    thresholds: tuple = PAPER_THRESHOLDS
    symbol_interval: float = 20.0
    detection_window: float | None = None
    smoothing_k: int = 12

    def __post_init__(self):
        object.__setattr__(self, "symbol_pressures", tuple(float(p) for p in self.symbol_pressures))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if self.detection_window is None:
            object.__setattr__(self, "detection_window", float(self.symbol_interval))
        if self.m < 2:
            raise ConfigError(f"alphabet size m must be >= 2, got {self.m}")
        if len(self.symbol_pressures) != self.m:
            raise ConfigError(f"need {self.m} symbol pressures, got {len(self.symbol_pressures)}")
        if len(self.thresholds) != self.m - 1:
            raise ConfigError(f"need {self.m - 1} thresholds, got {len(self.thresholds)}")
        if np.any(np.diff(self.symbol_pressures) <= 0):
            raise ConfigError("symbol pressures must be strictly increasing")
        if np.any(np.diff(self.thresholds) <= 0):
            raise ConfigError("thresholds must be strictly increasing")
        if not self.symbol_interval > 0:
            raise ConfigError("symbol_interval must be > 0")
        if not self.detection_window > 0:
            raise ConfigError("detection_window must be > 0")
        if int(self.smoothing_k) != self.smoothing_k or self.smoothing_k < 1:
            raise ConfigError("smoothing_k must be an integer >= 1")


PROFILES = {
    "paper-20s": FskConfig(symbol_interval=20.0, detection_window=20.0),
    "paper-12s": FskConfig(symbol_interval=12.0, detection_window=12.4),
}


@dataclass(frozen=True, eq=False)
class FrequencySeries:
    times: np.ndarray
    raw: np.ndarray
    smoothed: np.ndarray

    def __len__(self):
        return self.times.size

    @property
    def points(self):
        return list(zip(self.times.tolist(), self.raw.tolist(), self.smoothed.tolist()))


@dataclass(frozen=True)
class WindowDecision:
    index: int
    start: float
    end: float
    midpoint: float
    n_estimates: int
    estimate_time: float | None
    statistic: float | None
    symbol: int

    @property
    def erased(self) -> bool:
        return self.symbol == ERASURE


def compute_thresholds(means: Sequence[float]) -> np.ndarray:
    """Decision boundaries halfway between consecutive mean frequencies."""
    mu = np.asarray(means, dtype=float)
    if mu.size < 2:
        raise ValueError("need at least two mean frequencies")
    if np.any(np.diff(mu) <= 0):
        raise OrderingError("mean frequencies must be strictly increasing for separable symbols")
    return 0.5 * (mu[:-1] + mu[1:])


def encode(symbols: Sequence[int], config: FskConfig) -> PressureSchedule:
    syms = np.asarray(symbols, dtype=int).reshape(-1)
    if syms.size and (syms.min() < 0 or syms.max() >= config.m):
        bad = syms[(syms < 0) | (syms >= config.m)][0]
        raise ValueError(f"symbol {bad} outside alphabet [0, {config.m})")
    pressures = np.asarray(config.symbol_pressures)[syms]
    starts = np.arange(syms.size) * config.symbol_interval
    return PressureSchedule(pressures, starts, syms.size * config.symbol_interval)


def instantaneous_frequencies(arrivals) -> tuple[np.ndarray, np.ndarray]:
    """``(t_i, 1/(t_i - t_{i-1}))`` for i >= 1 as two arrays."""
    ts = arrivals.timestamps if isinstance(arrivals, DropletEventSeries) else np.asarray(arrivals, float)
    if ts.size < 2:
        return np.empty(0), np.empty(0)
    return ts[1:].copy(), 1.0 / np.diff(ts)


def smooth(times, freqs, k: int) -> FrequencySeries:
    """Trailing moving average over the last ``k`` estimates (fewer at the start)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t = np.asarray(times, dtype=float)
    f = np.asarray(freqs, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(f)])
    i = np.arange(f.size)
    lo = np.maximum(0, i - k + 1)
    s = (c[i + 1] - c[lo]) / (i + 1 - lo)
    if k == 1:
        s = f.copy()
    return FrequencySeries(t, f, s)


def classify(freq: float, thresholds: Sequence[float]) -> int:
    """Number of thresholds strictly below ``freq``; ties go to the lower symbol."""
    return int(np.searchsorted(np.asarray(thresholds, dtype=float), freq, side="left"))


def decode(arrivals: DropletEventSeries, config: FskConfig, n_symbols: int):
    """Classify ``n_symbols`` windows from arrival times.

    Window k spans ``[k*interval, k*interval + detection_window]``. Its
    statistic is the smoothed estimate closest to the window midpoint among
    those stamped inside the window (earlier wins a tie). Empty windows are
    erased. Returns ``(symbols, decisions)``.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    t, f = instantaneous_frequencies(arrivals)
    series = smooth(t, f, config.smoothing_k)
    symbols = np.full(n_symbols, ERASURE, dtype=int)
    decisions = []
    for k in range(n_symbols):
        start = k * config.symbol_interval
        end = start + config.detection_window
        mid = start + config.detection_window / 2
        lo = np.searchsorted(series.times, start, side="left")
        hi = np.searchsorted(series.times, end, side="right")
        n_est = int(hi - lo)
        if n_est == 0:
            decisions.append(WindowDecision(k, start, end, mid, 0, None, None, ERASURE))
            continue
        j = lo + int(np.argmin(np.abs(series.times[lo:hi] - mid)))
        stat = float(series.smoothed[j])
        symbols[k] = classify(stat, config.thresholds)
        decisions.append(WindowDecision(k, start, end, mid, n_est, float(series.times[j]), stat, int(symbols[k])))
    return symbols, decisions


def write_decoded_csv(path, decisions) -> None:
    rows = (
        (d.index, d.midpoint, "" if d.statistic is None else d.statistic, d.symbol)
        for d in decisions
    )
    _csvio.write_csv(path, DECODED_HEADER, rows)


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def config_from_section(section) -> FskConfig:
    kw = {}
    try:
        if "m" in section:
            kw["m"] = int(section["m"])
        if "symbol_pressures" in section:
            kw["symbol_pressures"] = _floats(section["symbol_pressures"])
        if "thresholds" in section:
            kw["thresholds"] = _floats(section["thresholds"])
        if "symbol_interval" in section:
            kw["symbol_interval"] = float(section["symbol_interval"])
        if section.get("detection_window", "").strip():
            kw["detection_window"] = float(section["detection_window"])
        if "smoothing_k" in section:
            kw["smoothing_k"] = int(section["smoothing_k"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    unknown = set(section) - {"m", "symbol_pressures", "thresholds", "symbol_interval", "detection_window", "smoothing_k"}
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    return FskConfig(**kw)


def config_to_section(config: FskConfig) -> dict:
    return {
        "m": str(config.m),
        "symbol_pressures": ", ".join(_csvio.fmt(p) for p in config.symbol_pressures),
        "thresholds": ", ".join(_csvio.fmt(t) for t in config.thresholds),
        "symbol_interval": _csvio.fmt(config.symbol_interval),
        "detection_window": _csvio.fmt(config.detection_window),
        "smoothing_k": str(config.smoothing_k),
    }


def read_fsk_config(path) -> FskConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    if not cp.has_section("fsk"):
        raise ConfigError(f"{path}: missing [fsk] section")
    return config_from_section(cp["fsk"])


def write_fsk_config(path, config: FskConfig) -> None:
    cp = configparser.ConfigParser()
    cp["fsk"] = config_to_section(config)
    with open(path, "w") as fh:
        cp.write(fh)
