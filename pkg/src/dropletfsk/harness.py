"""End-to-end experiments, scoring and seeded Monte-Carlo sweeps."""

from __future__ import annotations

import configparser
import hashlib
import io
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import _csvio
from .calibration import CalibrationCurve, default_curve, read_calibration_csv
from .channel import ChannelModel, propagate
from .errors import ConfigError, DropletFskError, StageError
from .modem import (
    ERASURE,
    PROFILES,
    FskConfig,
    config_from_section,
    config_to_section,
    decode,
    encode,
)
from .photodetect import PulseModel, SpikeDetectorParams, detect_spikes, synthesize_trace
from .transmitter import ControllerModel, GenJitterModel, generate_droplets

log = logging.getLogger(__name__)

SWEEP_PARAMS = ("symbol_interval", "detection_window", "tau", "cv", "jitter_sigma", "smoothing_k")


@dataclass(frozen=True)
class ExperimentSpec:
    fsk: FskConfig = FskConfig()
    curve: CalibrationCurve = field(default_factory=default_curve)
    controller: ControllerModel = ControllerModel()
    jitter: GenJitterModel = GenJitterModel()
    channel: ChannelModel = ChannelModel()
    pulse: PulseModel | None = None
    detector: SpikeDetectorParams | None = None
    n_symbols: int = 20
    master_seed: int = 0
    repetitions: int = 1
    sample_rate: float = 100.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.n_symbols < 1:
            raise ConfigError("n_symbols must be >= 1")
        if (self.pulse is None) != (self.detector is None):
            raise ConfigError("pulse and detector must be given together")


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    tx: np.ndarray
    rx: np.ndarray
    ser: float
    confusion: np.ndarray
    per_window: list
    seed_used: int

    @property
    def n_errors(self) -> int:
        return int(np.count_nonzero(self.rx != self.tx))

    def __eq__(self, other):
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return (
            np.array_equal(self.tx, other.tx)
            and np.array_equal(self.rx, other.rx)
            and self.ser == other.ser
            and np.array_equal(self.confusion, other.confusion)
            and self.per_window == other.per_window
            and self.seed_used == other.seed_used
        )


@dataclass(frozen=True)
class SweepRow:
    params: dict
    mean_ser: float
    std_ser: float
    n_reps: int
    errors: tuple = ()


def derive_seed(master_seed: int, stage: str, repetition: int = 0) -> int:
    """Stable 63-bit sub-seed from (master seed, stage name, repetition)."""
    digest = hashlib.sha256(f"{master_seed}:{stage}:{repetition}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def random_sequence(m: int, n: int, seed) -> np.ndarray:
    if m < 2 or n < 1:
        raise ValueError("need m >= 2 and n >= 1")
    return np.random.default_rng(seed).integers(0, m, size=n)


def symbol_error_rate(tx, rx) -> float:
    tx = np.asarray(tx)
    rx = np.asarray(rx)
    if tx.shape != rx.shape:
        raise ValueError(f"length mismatch: tx has {tx.size}, rx has {rx.size}")
    if tx.size == 0:
        return 0.0
    return float(np.count_nonzero(tx != rx)) / tx.size


def confusion_matrix(tx, rx, m: int) -> np.ndarray:
    """m x (m+1) counts; the last column collects erasures."""
    cm = np.zeros((m, m + 1), dtype=int)
    for a, b in zip(np.asarray(tx), np.asarray(rx)):
        cm[a, m if b == ERASURE else b] += 1
    return cm


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except DropletFskError as exc:
        raise StageError(name, exc) from exc
    except ValueError as exc:
        raise StageError(name, exc) from exc


def run_experiment(spec: ExperimentSpec, repetition: int = 0) -> ExperimentReport:
    """One seeded transmission of ``spec.n_symbols`` random symbols."""
    seed = spec.master_seed
    cfg = spec.fsk
    tx = random_sequence(cfg.m, spec.n_symbols, derive_seed(seed, "sequence", repetition))
    schedule = _stage("encode", encode, tx, cfg)
    jitter = replace(spec.jitter, rng_seed=derive_seed(seed, "generation", repetition))
    gen = _stage("generate", generate_droplets, schedule, spec.controller, spec.curve, jitter)
    channel = replace(spec.channel, rng_seed=derive_seed(seed, "channel", repetition))
    arrivals = _stage("propagate", propagate, gen, channel)
    if spec.pulse is not None:
        pulse = replace(spec.pulse, rng_seed=derive_seed(seed, "pulse", repetition))
        duration = schedule.total_duration + channel.transit_delay + 1.0
        if len(arrivals):
            duration = max(duration, float(arrivals.timestamps[-1]))
        trace = _stage("synthesize", synthesize_trace, arrivals, pulse, spec.sample_rate, duration)
        arrivals = _stage("detect", detect_spikes, trace, spec.detector)
    rx, windows = _stage("decode", decode, arrivals, cfg, spec.n_symbols)
    return ExperimentReport(
        tx=tx,
        rx=rx,
        ser=symbol_error_rate(tx, rx),
        confusion=confusion_matrix(tx, rx, cfg.m),
        per_window=windows,
        seed_used=seed,
    )


def paper_spec(profile: str = "paper-20s", noise: bool = True, **overrides) -> ExperimentSpec:
    """Spec for one of the published 4-FSK setups.

    ``noise=True`` uses the calibrated profile: 1 s controller lag, interval
    CV 0.1 and 20 ms channel jitter. ``noise=False`` is the ideal channel.
    """
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    if noise:
        kw = dict(
            controller=ControllerModel(time_constant_tau=1.0),
            jitter=GenJitterModel("interval-cv", 0.1),
            channel=ChannelModel(jitter_sigma=0.02),
        )
    else:
        kw = dict(
            controller=ControllerModel(time_constant_tau=0.0),
            jitter=GenJitterModel("none", 0.0),
            channel=ChannelModel(jitter_sigma=0.0),
        )
    kw.update(overrides)
    return ExperimentSpec(fsk=PROFILES[profile], **kw)


def run_repetitions(spec: ExperimentSpec) -> list[ExperimentReport]:
    return [run_experiment(spec, r) for r in range(spec.repetitions)]


def apply_params(spec: ExperimentSpec, params: Mapping) -> ExperimentSpec:
    """Copy of ``spec`` with sweep parameters applied.

    Changing ``symbol_interval`` alone keeps the template's window extension
    (detection_window - symbol_interval).
    """
    unknown = set(params) - set(SWEEP_PARAMS)
    if unknown:
        raise ConfigError(f"unknown sweep parameters: {', '.join(sorted(unknown))}")
    fsk = spec.fsk
    fsk_kw = {}
    if "symbol_interval" in params:
        fsk_kw["symbol_interval"] = float(params["symbol_interval"])
        fsk_kw["detection_window"] = fsk_kw["symbol_interval"] + (fsk.detection_window - fsk.symbol_interval)
    if "detection_window" in params:
        fsk_kw["detection_window"] = float(params["detection_window"])
    if "smoothing_k" in params:
        fsk_kw["smoothing_k"] = int(params["smoothing_k"])
    kw = {}
    if fsk_kw:
        kw["fsk"] = replace(fsk, **fsk_kw)
    if "tau" in params:
        kw["controller"] = replace(spec.controller, time_constant_tau=float(params["tau"]))
    if "cv" in params:
        cv = float(params["cv"])
        kw["jitter"] = replace(spec.jitter, mode="interval-cv" if cv > 0 else "none", coefficient_of_variation=cv)
    if "jitter_sigma" in params:
        kw["channel"] = replace(spec.channel, jitter_sigma=float(params["jitter_sigma"]))
    return replace(spec, **kw)


def _cell(args):
    spec, params = args
    try:
        cell = apply_params(spec, params)
        sers = np.array([r.ser for r in run_repetitions(cell)])
        return SweepRow(dict(params), float(sers.mean()), float(sers.std(ddof=1)) if sers.size > 1 else 0.0, sers.size)
    except (DropletFskError, ValueError) as exc:
        log.warning("sweep cell %s failed: %s", params, exc)
        return SweepRow(dict(params), float("nan"), float("nan"), 0, (str(exc),))


def expand_grid(grid: Mapping[str, Sequence]) -> list[dict]:
    if not grid:
        raise ValueError("sweep grid must not be empty")
    keys = list(grid)
    for k in keys:
        if not len(grid[k]):
            raise ValueError(f"grid axis {k!r} is empty")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sweep(template: ExperimentSpec, grid: Mapping[str, Sequence], repetitions: int | None = None, workers: int = 1):
    """Mean and sample std of SER per grid cell.

    Every cell uses the same master seed, so cells see the same symbol
    sequences and differ only in the swept parameters. Failing cells are
    reported with NaN statistics instead of aborting.
    """
    if repetitions is not None:
        template = replace(template, repetitions=repetitions)
    cells = [(template, p) for p in expand_grid(grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_cell, cells))
    return [_cell(c) for c in cells]


# -- files -------------------------------------------------------------------


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> None:
    keys = list(rows[0].params) if rows else []
    out = [[r.params[k] for k in keys] + [r.mean_ser, r.std_ser, r.n_reps] for r in rows]
    _csvio.write_csv(path, keys + ["mean_ser", "std_ser", "n_reps"], out)


def format_report(report: ExperimentReport, m: int) -> str:
    """Key-value header followed by ``[name]`` sections holding CSV tables."""
    buf = io.StringIO()
    buf.write(f"seed_used = {report.seed_used}\n")
    buf.write(f"n_symbols = {report.tx.size}\n")
    buf.write(f"n_errors = {report.n_errors}\n")
    buf.write(f"n_erasures = {int(np.count_nonzero(report.rx == ERASURE))}\n")
    buf.write(f"ser = {_csvio.fmt(report.ser)}\n")
    buf.write(f"tx = {' '.join(str(int(s)) for s in report.tx)}\n")
    buf.write(f"rx = {' '.join(str(int(s)) for s in report.rx)}\n")
    buf.write("\n[confusion]\n")
    buf.write("tx_symbol," + ",".join(f"rx_{j}" for j in range(m)) + ",erased\n")
    for i, row in enumerate(report.confusion):
        buf.write(f"{i}," + ",".join(str(int(v)) for v in row) + "\n")
    buf.write("\n[windows]\n")
    buf.write("window_index,start_s,end_s,midpoint_time_s,n_estimates,estimate_time_s,decision_freq_hz,symbol\n")
    for w in report.per_window:
        cells = [w.index, w.start, w.end, w.midpoint, w.n_estimates,
                 "" if w.estimate_time is None else w.estimate_time,
                 "" if w.statistic is None else w.statistic, w.symbol]
        buf.write(",".join(_csvio.fmt(c) for c in cells) + "\n")
    return buf.getvalue()


def write_report(path, report: ExperimentReport, m: int) -> None:
    Path(path).write_text(format_report(report, m))


def _section_kwargs(cp, name, types):
    if not cp.has_section(name):
        return None
    sec = cp[name]
    unknown = set(sec) - set(types)
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
    kw = {}
    for key, conv in types.items():
        if key in sec:
            try:
                kw[key] = conv(sec[key])
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from exc
    return kw


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SECTIONS = {
    "controller": (ControllerModel, {"time_constant_tau": float, "initial_pressure": float}),
    "jitter": (GenJitterModel, {"mode": str, "coefficient_of_variation": float, "rng_seed": int}),
    "channel": (ChannelModel, {"transit_delay": float, "jitter_sigma": float, "loss_prob": float,
                               "enforce_fifo": _bool, "rng_seed": int}),
    "pulse": (PulseModel, {"amplitude": float, "width_sigma": float, "baseline": float,
                           "noise_sigma": float, "rng_seed": int}),
    "detector": (SpikeDetectorParams, {"threshold": float, "min_separation": float}),
}

_EXPERIMENT_KEYS = {"profile": str, "calibration": str, "n_symbols": int, "master_seed": int,
                    "repetitions": int, "sample_rate": float}


def load_experiment_config(path, calibration=None) -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from an INI file.

    ``[experiment] profile`` seeds the [fsk] section from a named profile; any
    [fsk] keys then override it. All validation problems are collected and
    raised together as one ConfigError.
    """
    path = Path(path)
    cp = configparser.ConfigParser()
    try:
        with path.open() as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return spec_from_parser(cp, base_dir=path.parent, calibration=calibration)


def spec_from_parser(cp: configparser.ConfigParser, base_dir=Path("."), calibration=None) -> ExperimentSpec:
    problems = []
    kw = {}
    known = {"experiment", "fsk", *_SECTIONS}
    for s in cp.sections():
        if s not in known:
            problems.append(f"unknown section [{s}]")
    exp = {}
    try:
        exp = _section_kwargs(cp, "experiment", _EXPERIMENT_KEYS) or {}
    except ConfigError as exc:
        problems.append(str(exc))

    profile = exp.pop("profile", None)
    fsk = FskConfig()
    if profile is not None:
        if profile not in PROFILES:
            problems.append(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
        else:
            fsk = PROFILES[profile]
    if cp.has_section("fsk"):
        merged = config_to_section(fsk)
        if profile is not None and "symbol_interval" in cp["fsk"] and "detection_window" not in cp["fsk"]:
            merged.pop("detection_window")
        merged.update(dict(cp["fsk"]))
        try:
            fsk = config_from_section(merged)
        except ConfigError as exc:
            problems.append(f"[fsk] {exc}")
    kw["fsk"] = fsk

    cal_path = calibration if calibration is not None else exp.pop("calibration", None)
    exp.pop("calibration", None)
    if cal_path is not None:
        p = Path(cal_path)
        if not p.is_absolute():
            p = Path(base_dir) / p
        if not p.exists():
            problems.append(f"calibration file not found: {p}")
        else:
            try:
                kw["curve"] = read_calibration_csv(p)
            except DropletFskError as exc:
                problems.append(f"calibration: {exc}")

    for name, (cls, types) in _SECTIONS.items():
        try:
            sec = _section_kwargs(cp, name, types)
            if sec is not None:
                kw[name] = cls(**sec)
        except (ConfigError, ValueError) as exc:
            problems.append(f"[{name}] {exc}")
    kw.update(exp)
    if not problems:
        try:
            return ExperimentSpec(**kw)
        except ConfigError as exc:
            problems.append(str(exc))
    raise ConfigError("invalid experiment config:\n  " + "\n  ".join(problems))
