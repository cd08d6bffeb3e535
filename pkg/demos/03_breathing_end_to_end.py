"""A person breathing at 15 bpm moves one echo by a fraction of a millimetre.

The trace below is a minute of two-antenna CSI at 50 Hz with independent
per-packet distortions on each antenna and 20 dB SNR.  Every scheme gets the
same data and the same rate estimator.
"""
from domino.channel_model import default_channel, default_motion, frame_times, noise_std_for_snr, simulate_trace
from domino.pipeline import SCHEMES, respire

spec = default_channel()
trace = simulate_trace(spec, default_motion(0.25), frame_times(60.0, 50.0), seed=3,
                       noise_std=noise_std_for_snr(spec, 20.0), n_antennas=2)
print(f"true rate {trace.true_rate_bpm[0]:.1f} bpm")
for scheme in SCHEMES:
    r = respire(trace, scheme)
    print(f"  {scheme:<13} {r.bpm:6.2f} bpm  channel {r.channel:3d}  periodicity {r.periodicity:.2f}")
