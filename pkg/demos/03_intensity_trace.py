"""Synthesizing the sampling-point intensity trace and recovering arrivals."""
import numpy as np

from dropletfsk.channel import ChannelModel, propagate
from dropletfsk.calibration import default_curve
from dropletfsk.modem import FskConfig, decode, encode
from dropletfsk.photodetect import PulseModel, SpikeDetectorParams, detect_spikes, synthesize_trace
from dropletfsk.transmitter import ControllerModel, GenJitterModel, generate_droplets

cfg = FskConfig(symbol_interval=20.0)
symbols = [0, 1, 2, 3]
gen = generate_droplets(encode(symbols, cfg), ControllerModel(1.0), default_curve(),
                        GenJitterModel("interval-cv", 0.1, rng_seed=3))
arrivals = propagate(gen, ChannelModel(jitter_sigma=0.02, rng_seed=3))

pulse = PulseModel(amplitude=1.0, width_sigma=0.01, noise_sigma=0.08, rng_seed=3)
trace = synthesize_trace(arrivals, pulse, sample_rate=100.0, duration=81.0)
detected = detect_spikes(trace, SpikeDetectorParams.for_pulse(pulse))
print(f"{len(arrivals)} arrivals, {len(detected)} detected spikes, {len(trace)} samples")

n = min(len(arrivals), len(detected))
err = detected.timestamps[:n] - arrivals.timestamps[:n]
print(f"timing error: max {np.abs(err).max() * 1e3:.1f} ms (sample period 10 ms)")

decoded, _ = decode(detected, cfg, len(symbols))
print("sent   ", symbols)
print("decoded", decoded.tolist())
