"""Command-line entry point.

Exit codes: 0 success, 1 runtime/model error, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import _csvio
from .calibration import (
    CalibrationCurve,
    characterize_setpoint,
    default_curve,
    fit_affine_calibration,
    mean_frequency_at,
    read_calibration_csv,
    write_calibration_csv,
)
from .channel import propagate
from .errors import ConfigError, DropletFskError, ParseError
from .events import DropletEventSeries, read_events_csv, write_events_csv
from .harness import (
    ExperimentSpec,
    apply_params,
    format_report,
    random_sequence,
    run_experiment,
    spec_from_parser,
    sweep,
    symbol_error_rate,
    write_sweep_csv,
)
from .modem import PROFILES, compute_thresholds, decode, encode, write_decoded_csv
from .photodetect import PulseModel, SpikeDetectorParams, detect_spikes, read_trace_csv, synthesize_trace, write_trace_csv
from .transmitter import ControllerModel, GenJitterModel, PressureSchedule, generate_droplets, write_schedule_csv

log = logging.getLogger("dropletfsk")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

TRUTH_HEADER = ("symbol",)


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# -- shared helpers ----------------------------------------------------------


def _profile_path(name: str) -> Path | None:
    ref = resources.files("dropletfsk").joinpath(f"data/{name}.ini")
    return Path(str(ref)) if ref.is_file() else None


def load_spec(args) -> ExperimentSpec:
    """Spec from ``--config`` (file path or shipped profile name) plus flag overrides."""
    cp = configparser.ConfigParser()
    base = Path(".")
    if args.config:
        path = Path(args.config)
        if not path.exists() and args.config in PROFILES:
            path = _profile_path(args.config)
        if path is None or not path.exists():
            raise CliError(f"config file not found: {args.config}")
        base = path.parent
        try:
            with path.open() as fh:
                cp.read_file(fh)
        except configparser.Error as exc:
            raise CliError(f"{path}: {exc}") from exc
    calibration = getattr(args, "calibration", None)
    if calibration is not None and not Path(calibration).exists():
        raise CliError(f"calibration file not found: {calibration}")
    spec = spec_from_parser(cp, base_dir=base, calibration=calibration)
    params = {}
    if getattr(args, "interval", None) is not None:
        params["symbol_interval"] = args.interval
    if getattr(args, "window", None) is not None:
        params["detection_window"] = args.window
    if params:
        spec = apply_params(spec, params)
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["master_seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        kw["repetitions"] = args.reps
    if getattr(args, "n_symbols", None) is not None:
        kw["n_symbols"] = args.n_symbols
    if getattr(args, "noiseless", False):
        kw["controller"] = replace(spec.controller, time_constant_tau=0.0)
        kw["jitter"] = replace(spec.jitter, mode="none", coefficient_of_variation=0.0)
        kw["channel"] = replace(spec.channel, jitter_sigma=0.0, loss_prob=0.0)
        if spec.pulse is not None:
            kw["pulse"] = replace(spec.pulse, noise_sigma=0.0)
    return replace(spec, **kw) if kw else spec


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _curve(args) -> CalibrationCurve:
    if args.calibration is None:
        return default_curve()
    if not Path(args.calibration).exists():
        raise CliError(f"calibration file not found: {args.calibration}")
    return read_calibration_csv(args.calibration)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CliError(f"expected a comma-separated list of numbers: {text!r}") from exc


def _g(x: float) -> str:
    return f"{x:g}" if float(x).is_integer() else _csvio.fmt(float(x))


def read_truth_csv(path) -> np.ndarray:
    data = _csvio.read_numeric_csv(path, TRUTH_HEADER)
    return data[:, 0].astype(int)


def write_truth_csv(path, symbols) -> None:
    _csvio.write_csv(path, TRUTH_HEADER, ([int(s)] for s in symbols))


# -- subcommands -------------------------------------------------------------


def cmd_characterize(args) -> int:
    if args.events:
        events = read_events_csv(args.events)
        if args.pressure is None:
            raise CliError("--pressure is required to label an events file")
    else:
        if args.pressure is None:
            raise CliError("give --events FILE or a --pressure setpoint to simulate")
        curve = _curve(args)
        f = mean_frequency_at(curve, args.pressure)
        n = args.n_droplets + 1
        duration = (n + 2) / f * (1 + 5 * args.cv)
        sched = PressureSchedule([args.pressure], [0.0], duration)
        jitter = GenJitterModel("interval-cv" if args.cv > 0 else "none", args.cv, args.seed or 0)
        gen = generate_droplets(sched, ControllerModel(0.0), curve, jitter)
        events = DropletEventSeries(gen.timestamps[:n], gen.origin)
    if len(events) < 3:
        raise CliError(f"need >= 3 events, got {len(events)}", EXIT_RUNTIME)
    mean, var = characterize_setpoint(events)
    row = f"{_g(args.pressure)},{_csvio.fmt(mean)},{_csvio.fmt(var)}"
    print(row)
    if args.append:
        path = Path(args.append)
        if not path.exists() or path.stat().st_size == 0:
            path.write_text("pressure_mbar,mean_freq_hz,freq_var_hz2\n")
        with path.open("a") as fh:
            fh.write(row + "\n")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    if args.fit_pressures:
        if not args.targets:
            raise CliError("--fit-pressures needs --targets")
        curve = fit_affine_calibration(_floats(args.fit_pressures), _floats(args.targets))
        if args.out_dir:
            write_calibration_csv(_out_dir(args) / "calibration.csv", curve)
        means = curve.means
    elif args.means:
        means = np.array(_floats(args.means))
    else:
        means = _curve(args).means
    th = compute_thresholds(means)
    print("threshold_index,threshold_hz")
    for i, t in enumerate(th):
        print(f"{i + 1},{_csvio.fmt(t)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_spec(args)
    out = _out_dir(args)
    seed = spec.master_seed
    if args.symbols:
        symbols = np.array([int(v) for v in _floats(args.symbols)], dtype=int)
    else:
        symbols = random_sequence(spec.fsk.m, spec.n_symbols, seed)
    schedule = encode(symbols, spec.fsk)
    gen = generate_droplets(schedule, spec.controller, spec.curve, replace(spec.jitter, rng_seed=seed))
    arrivals = propagate(gen, replace(spec.channel, rng_seed=seed))
    write_truth_csv(out / "truth.csv", symbols)
    write_schedule_csv(out / "schedule.csv", schedule)
    write_events_csv(out / "generation.csv", gen)
    write_events_csv(out / "arrivals.csv", arrivals)
    if args.trace or spec.pulse is not None:
        pulse = replace(spec.pulse or PulseModel(), rng_seed=seed)
        duration = schedule.total_duration + spec.channel.transit_delay + 1.0
        if len(arrivals):
            duration = max(duration, float(arrivals.timestamps[-1]))
        write_trace_csv(out / "trace.csv", synthesize_trace(arrivals, pulse, spec.sample_rate, duration))
    print(f"simulated {symbols.size} symbols, {len(gen)} droplets -> {out}")
    return EXIT_OK


def cmd_decode_trace(args) -> int:
    spec = load_spec(args)
    trace = read_trace_csv(args.trace)
    detector = spec.detector or SpikeDetectorParams()
    arrivals = detect_spikes(trace, detector)
    truth = read_truth_csv(args.truth) if args.truth else None
    if args.n_symbols is not None:
        n = args.n_symbols
    elif truth is not None:
        n = truth.size
    else:
        end = trace.times[-1]
        n = max(1, int(np.floor(end / spec.fsk.symbol_interval + 1e-9)))
    symbols, windows = decode(arrivals, spec.fsk, n)
    out = _out_dir(args)
    write_decoded_csv(out / "decoded.csv", windows)
    print("decoded: " + " ".join(str(int(s)) for s in symbols))
    if truth is not None:
        if truth.size != symbols.size:
            raise CliError(f"truth has {truth.size} symbols, decoded {symbols.size}", EXIT_RUNTIME)
        print(f"ser = {_csvio.fmt(symbol_error_rate(truth, symbols))}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = load_spec(args)
    out = _out_dir(args)
    sers = []
    for r in range(spec.repetitions):
        rep = run_experiment(spec, r)
        sers.append(rep.ser)
        name = "report.txt" if spec.repetitions == 1 else f"report_{r:04d}.txt"
        (out / name).write_text(f"repetition = {r}\n" + format_report(rep, spec.fsk.m))
    sers = np.array(sers)
    print(f"repetitions = {sers.size}")
    print(f"mean_ser = {_csvio.fmt(float(sers.mean()))}")
    print(f"mean_errors_per_run = {_csvio.fmt(float(sers.mean() * spec.n_symbols))}")
    print(f"error_free_fraction = {_csvio.fmt(float(np.mean(sers == 0)))}")
    return EXIT_OK


def _parse_grid(items) -> dict:
    grid = {}
    for item in items:
        if "=" not in item:
            raise CliError(f"grid axis must look like name=v1,v2: {item!r}")
        key, _, vals = item.partition("=")
        grid[key.strip()] = _floats(vals)
    return grid


def cmd_sweep(args) -> int:
    spec = load_spec(args)
    grid = _parse_grid(args.grid or [])
    if args.interval_list:
        grid.setdefault("symbol_interval", _floats(args.interval_list))
    if not grid:
        raise CliError("sweep needs at least one --grid axis")
    try:
        apply_params(spec, {k: v[0] for k, v in grid.items()})
    except ConfigError as exc:
        raise CliError(str(exc)) from exc
    rows = sweep(spec, grid, workers=args.workers)
    out = _out_dir(args)
    write_sweep_csv(out / "sweep.csv", rows)
    for r in rows:
        params = " ".join(f"{k}={_g(v)}" for k, v in r.params.items())
        print(f"{params} mean_ser={r.mean_ser:.4f} std_ser={r.std_ser:.4f} n_reps={r.n_reps}")
    return EXIT_RUNTIME if any(r.errors for r in rows) else EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dropletfsk", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="INI config file or profile name (paper-20s, paper-12s)")
        sp.add_argument("--calibration", help="calibration CSV (default: shipped reconstruction)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", default=".")

    def timing(sp):
        sp.add_argument("--interval", type=float, help="symbol interval in s")
        sp.add_argument("--window", type=float, help="detection window in s")
        sp.add_argument("--n-symbols", type=int)
        sp.add_argument("--noiseless", action="store_true", help="zero lag, jitter and noise")

    sp = sub.add_parser("characterize", help="mean/variance row for one setpoint")
    common(sp, config=False)
    sp.add_argument("--events", help="event CSV (timestamp_s)")
    sp.add_argument("--pressure", type=float, help="setpoint in mbar")
    sp.add_argument("--n-droplets", type=int, default=20, help="intervals per simulated characterization")
    sp.add_argument("--cv", type=float, default=0.0, help="interval CV for simulated characterization")
    sp.add_argument("--append", help="append the row to this calibration CSV")
    sp.set_defaults(func=cmd_characterize)

    sp = sub.add_parser("thresholds", help="midpoint decision thresholds")
    common(sp, config=False)
    sp.add_argument("--means", help="comma-separated mean frequencies")
    sp.add_argument("--fit-pressures", help="equally spaced symbol pressures for an affine fit")
    sp.add_argument("--targets", help="target thresholds for the affine fit")
    sp.set_defaults(func=cmd_thresholds, out_dir=None)

    sp = sub.add_parser("simulate", help="symbols -> schedule, droplets, arrivals (and trace)")
    common(sp)
    timing(sp)
    sp.add_argument("--symbols", help="comma-separated symbol indices (default: random)")
    sp.add_argument("--trace", action="store_true", help="also write an intensity trace")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("decode-trace", help="detect spikes in a trace and decode symbols")
    common(sp)
    timing(sp)
    sp.add_argument("trace", help="trace CSV (time_s,intensity)")
    sp.add_argument("--truth", help="truth CSV (symbol) for SER")
    sp.set_defaults(func=cmd_decode_trace)

    sp = sub.add_parser("experiment", help="seeded end-to-end runs with reports")
    common(sp)
    timing(sp)
    sp.add_argument("--reps", type=int)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("sweep", help="Monte-Carlo SER over a parameter grid")
    common(sp)
    timing(sp)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--grid", action="append", help="axis as name=v1,v2 (symbol_interval, detection_window, tau, cv, jitter_sigma, smoothing_k)")
    sp.add_argument("--interval-list", help="shorthand for --grid symbol_interval=...")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DropletFskError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
