"""Reconstructing the per-symbol mean frequencies from the published thresholds.

Only the three decision thresholds (2.51, 4.05, 5.69 Hz) are available as
numbers, so we fit a line f(P) = a*P + b whose values at the midpoints between
the four symbol pressures hit those thresholds, then check the characterization
statistics on a simulated 20-interval measurement.
"""
import numpy as np

from dropletfsk.calibration import (
    PAPER_SYMBOL_PRESSURES,
    PAPER_THRESHOLDS,
    affine_midpoint_fit,
    characterize_setpoint,
    fit_affine_calibration,
)
from dropletfsk.modem import compute_thresholds
from dropletfsk.transmitter import ControllerModel, GenJitterModel, PressureSchedule, generate_droplets

a, b = affine_midpoint_fit(PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS)
print(f"slope {a:.4f} Hz/mbar, intercept {b:.3f} Hz")

curve = fit_affine_calibration(PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS)
for p, f in zip(curve.pressures, curve.means):
    print(f"  {p:6.1f} mbar -> {f:.3f} Hz")

th = compute_thresholds(curve.means)
print("midpoints", np.round(th, 3), "residuals", np.round(th - np.array(PAPER_THRESHOLDS), 4))

# %% 20-interval characterization with 10 % interval jitter
for p in PAPER_SYMBOL_PRESSURES:
    sched = PressureSchedule([p], [0.0], 30.0)
    ev = generate_droplets(sched, ControllerModel(0.0), curve, GenJitterModel("interval-cv", 0.1, rng_seed=1))
    mean, var = characterize_setpoint(ev.timestamps[:21])
    print(f"  {p:6.1f} mbar: mean {mean:.3f} Hz, variance {var:.4f} Hz^2")
