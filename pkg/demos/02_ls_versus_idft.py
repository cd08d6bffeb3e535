"""Guard bands and the DC null leave holes in the spectrum.

Zero-filling them and running an inverse DFT smears every path across
neighbouring taps.  Least squares on a short tap support fills the holes
consistently, as long as the paths sit on that support.
"""
import numpy as np

from domino.channel_model import ChannelSpec, PathComponent, default_layout, full_band_cir, sparse_tap_channel, synth_csi
from domino.cir_estimation import build_ls_operator, estimate_cir_idft, estimate_cir_ls, nmse_db
from domino.frames import TapSet

layout = default_layout()
op = build_ls_operator(layout, TapSet.contiguous(32), ridge=0.0)
print(f"{layout.n_active} of {layout.n_fft} subcarriers observed, 32-tap support")

spec = sparse_tap_channel(np.random.default_rng(4), layout)
frame = synth_csi(spec)
truth = full_band_cir(spec)[:32]
print("on-grid paths at taps", [round(d / layout.ts) for d in spec.delays])
print(f"  LS   NMSE {nmse_db(estimate_cir_ls(op, frame).taps, truth):7.1f} dB")
print(f"  IDFT NMSE {nmse_db(estimate_cir_idft(frame).taps[:32], truth):7.1f} dB")

ts = layout.ts
off = ChannelSpec((PathComponent(1.0, 4.3 * ts), PathComponent(0.5j, 11.6 * ts)), 5.25e9, layout)
frame = synth_csi(off)
truth = full_band_cir(off)[:32]
print("off-grid paths at 4.3 and 11.6 taps leak outside any finite support:")
print(f"  LS   NMSE {nmse_db(estimate_cir_ls(op, frame).taps, truth):7.1f} dB")
print(f"  IDFT NMSE {nmse_db(estimate_cir_idft(frame).taps[:32], truth):7.1f} dB")
