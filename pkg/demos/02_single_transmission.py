"""One 20-symbol transmission at 12 s per symbol, window by window.

Shows where the decision statistic lands relative to the thresholds and which
windows suffer from the controller transient.
"""
import numpy as np

from dropletfsk.harness import paper_spec, run_experiment
from dropletfsk.modem import PROFILES

spec = paper_spec("paper-12s", master_seed=2025)
thresholds = PROFILES["paper-12s"].thresholds

# pick a repetition that contains an error
for rep in range(50):
    report = run_experiment(spec, rep)
    if report.n_errors:
        break

print(f"repetition {rep}: {report.n_errors} error(s), SER {report.ser:.3f}")
print(" k  tx  rx  n_est  t_est    stat")
for w, t in zip(report.per_window, report.tx):
    flag = "  <-- error" if w.symbol != t else ""
    print(f"{w.index:2d}  {t:2d}  {w.symbol:2d}  {w.n_estimates:5d}  {w.estimate_time:6.2f}  {w.statistic:6.3f}{flag}")
print("thresholds", thresholds)
print("confusion (rows tx, last column erasures)")
print(report.confusion)
