"""Multipath channels with per-frame hardware distortion.

A channel is a list of paths with complex gain ``alpha_l`` and delay
``tau_l``.  Each received packet is corrupted by one ``DistortionDraw``: a
real gain ``beta`` (AGC), a phase offset ``theta`` (CFO/PLL/phase ambiguity)
and a delay shift ``epsilon`` (SFO/packet detection delay), applied to every
path alike.

The frequency-domain simulator is the single source of truth; the CIR model
uses the Dirichlet kernel of the active band as its pulse, so both views agree
to rounding error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .frames import CsiFrame, Cir, SubcarrierLayout, Trace

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    delay: float

    def __post_init__(self):
        object.__setattr__(self, "gain", complex(self.gain))
        object.__setattr__(self, "delay", float(self.delay))
        if self.delay < 0:
            raise ValueError("path delay must be non-negative")


@dataclass(frozen=True)
class ChannelSpec:
    paths: tuple
    carrier_hz: float
    layout: SubcarrierLayout

    def __post_init__(self):
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        if not paths:
            raise ValueError("a channel needs at least one path")
        window = self.max_delay_spread
        for p in paths:
            if not 0 <= p.delay < window:
                raise ValueError(
                    f"path delay {p.delay:.4g} s outside the tap window [0, {window:.4g}) s"
                )

    @property
    def max_delay_spread(self):
        return self.layout.n_fft * self.layout.ts

    @property
    def gains(self):
        return np.array([p.gain for p in self.paths], dtype=np.complex128)

    @property
    def delays(self):
        return np.array([p.delay for p in self.paths], dtype=np.float64)

    @property
    def dominant_index(self):
        """Index of the strongest path; equal magnitudes go to the earliest."""
        mags = np.abs(self.gains)
        best = np.flatnonzero(mags == mags.max())
        return int(best[np.argmin(self.delays[best])])

    def replace_path(self, index, path):
        paths = list(self.paths)
        paths[index] = path
        return ChannelSpec(tuple(paths), self.carrier_hz, self.layout)


@dataclass(frozen=True)
class DistortionDraw:
    beta: float = 1.0
    theta: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 <= self.theta < TWO_PI:
            raise ValueError("theta must lie in [0, 2*pi)")

    @property
    def factor(self):
        """The complex scalar ``beta * exp(-j theta)`` common to all paths."""
        return self.beta * np.exp(-1j * self.theta)


@dataclass(frozen=True)
class DistortionRanges:
    """Uniform sampling ranges; ``epsilon_taps`` is in units of the tap spacing."""

    beta: tuple = (0.5, 2.0)
    theta: tuple = (0.0, TWO_PI)
    epsilon_taps: tuple = (-2.0, 2.0)

    def sample(self, rng, ts):
        beta = rng.uniform(*self.beta)
        theta = rng.uniform(*self.theta) % TWO_PI
        eps = rng.uniform(*self.epsilon_taps) * ts
        return DistortionDraw(beta, theta, eps)

    @classmethod
    def none(cls):
        return cls((1.0, 1.0), (0.0, 0.0), (0.0, 0.0))


@dataclass(frozen=True)
class MotionModel:
    target_path_index: int
    delay_amplitude_s: float
    gain_amplitude: float
    rate_hz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not 0 < self.rate_hz < 1:
            raise ValueError("rate_hz must lie in (0, 1)")
        if self.delay_amplitude_s < 0:
            raise ValueError("delay_amplitude_s must be non-negative")
        if not 0 <= self.gain_amplitude < 1:
            raise ValueError("gain_amplitude must lie in [0, 1)")

    def modulation(self, t):
        return np.sin(TWO_PI * self.rate_hz * np.asarray(t, dtype=float) + self.phase_rad)


class TraceSample(NamedTuple):
    frame: CsiFrame
    draw: DistortionDraw
    spec: ChannelSpec


def fractional_delay(tau_hat, ts):
    """Offset of ``tau_hat`` from the nearest tap, rounding halves away from zero."""
    if ts <= 0:
        raise ValueError("ts must be positive")
    x = np.asarray(tau_hat, dtype=float) / ts
    nearest = np.sign(x) * np.floor(np.abs(x) + 0.5)
    out = np.asarray(tau_hat, dtype=float) - nearest * ts
    return float(out) if out.ndim == 0 else out


def sample_pulse(n, tau, ts, layout):
    """Band-limited pulse ``p[n, tau]`` for the active subcarriers of ``layout``.

    Normalized so an on-grid delay gives 1 at its own tap.  Broadcasts over
    ``n`` and ``tau``.
    """
    if ts <= 0:
        raise ValueError("ts must be positive")
    x = np.asarray(n, dtype=float) - np.asarray(tau, dtype=float) / ts
    ks = layout.signed_active
    phase = np.multiply.outer(x, ks * (TWO_PI / layout.n_fft))
    out = np.exp(1j * phase).mean(axis=-1)
    return complex(out) if out.ndim == 0 else out


def _check_draw(spec, draw):
    limit = spec.max_delay_spread / 4
    if abs(draw.epsilon) >= limit:
        raise ValueError(f"|epsilon| must stay below N*ts/4 = {limit:.4g} s")


def _path_weights(spec):
    return spec.gains * np.exp(-1j * TWO_PI * spec.carrier_hz * spec.delays)


def synth_csi(spec, draw=DistortionDraw(), noise_std=0.0, rng=None, timestamp=0.0):
    """Distorted CSI on the active subcarriers, plus optional receiver noise."""
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    _check_draw(spec, draw)
    f = spec.layout.freqs_hz
    ramp = np.exp(-1j * TWO_PI * np.outer(f, spec.delays + draw.epsilon))
    h = draw.factor * (ramp @ _path_weights(spec))
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        h = h + complex_noise(rng, noise_std, h.shape)
    return CsiFrame(h, spec.layout, timestamp)


def synth_cir(spec, draw=DistortionDraw(), n_taps=32):
    """Noise-free distorted CIR on taps ``0 .. n_taps-1``."""
    if n_taps > spec.layout.n_fft:
        raise ValueError("n_taps exceeds the DFT length")
    _check_draw(spec, draw)
    n = np.arange(n_taps)
    p = sample_pulse(n[:, None], (spec.delays + draw.epsilon)[None, :], spec.layout.ts, spec.layout)
    return Cir(draw.factor * (p @ _path_weights(spec)), spec.layout.ts)


def bandlimited_cir(frame, n_taps=32):
    """Delay-domain view of a frame in pulse units: ``mean_k H[k] exp(+j 2 pi k_s n / N)``.

    This is the transform under which ``synth_cir`` and ``synth_csi`` agree.
    """
    layout = frame.layout
    n = np.arange(n_taps)
    basis = np.exp(1j * TWO_PI / layout.n_fft * np.outer(n, layout.signed_active))
    return Cir(basis @ frame.values / layout.n_active, layout.ts)


def full_band_cir(spec, draw=DistortionDraw()):
    """Unitary-scale CIR over all ``N`` taps as if every DFT bin were observed.

    For on-grid delays this is exactly sparse; it is the reference the
    estimators are scored against.
    """
    layout = spec.layout
    full = SubcarrierLayout.full(layout.n_fft, layout.delta_f_hz)
    h = synth_csi(ChannelSpec(spec.paths, spec.carrier_hz, full), draw).values
    return np.fft.ifft(h, norm="ortho")


def complex_noise(rng, std, shape):
    """Circularly-symmetric Gaussian noise with ``std`` per real component."""
    re, im = rng.normal(0.0, std, size=(2,) + tuple(np.atleast_1d(shape)))
    return re + 1j * im


def noise_std_for_snr(spec, snr_db):
    """Per-component noise std giving ``snr_db`` against the undistorted CSI power."""
    power = np.mean(np.abs(synth_csi(spec).values) ** 2)
    return math.sqrt(power / (2.0 * 10 ** (snr_db / 10.0)))


def default_layout():
    """Desk-scale 160 MHz-class layout: N=256, 234 active, DC null, 625 kHz spacing."""
    return SubcarrierLayout.symmetric(256, 117, 625e3)


def default_channel(layout=None, carrier_hz=5.25e9):
    """Three-path indoor channel: strong static LoS, a breathing path and a wall echo."""
    layout = default_layout() if layout is None else layout
    ts = layout.ts
    paths = (
        PathComponent(1.0, 3.3 * ts),
        PathComponent(0.45 * np.exp(0.7j), 7.9 * ts),
        PathComponent(0.3 * np.exp(-2.1j), 12.6 * ts),
    )
    return ChannelSpec(paths, carrier_hz, layout)


def default_motion(rate_hz=0.25):
    return MotionModel(
        target_path_index=1,
        delay_amplitude_s=2.5e-11,
        gain_amplitude=0.2,
        rate_hz=rate_hz,
    )


def random_channel(rng, layout=None, n_paths=3, dominance_db=6.0, carrier_hz=5.25e9,
                   first_delay_taps=(0.0, 8.0), spacing_taps=(3.0, 20.0)):
    """Random channel whose first path is at least ``dominance_db`` above every other."""
    layout = default_layout() if layout is None else layout
    ts = layout.ts
    tau0 = rng.uniform(*first_delay_taps)
    delays = [tau0] + list(tau0 + rng.uniform(*spacing_taps, size=n_paths - 1))
    cap = 10 ** (-dominance_db / 20)
    mags = [1.0] + list(cap * rng.uniform(0.2, 1.0, size=n_paths - 1))
    phases = rng.uniform(0, TWO_PI, size=n_paths)
    paths = tuple(PathComponent(m * np.exp(1j * ph), d * ts) for m, ph, d in zip(mags, phases, delays))
    return ChannelSpec(paths, carrier_hz, layout)


def sparse_tap_channel(rng, layout=None, n_paths=4, max_tap=24, carrier_hz=0.0):
    """Random channel with every path on the tap grid (a tapped delay line)."""
    layout = default_layout() if layout is None else layout
    taps = np.sort(rng.choice(max_tap, size=n_paths, replace=False))
    gains = (rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)) / np.sqrt(2)
    paths = tuple(PathComponent(g, t * layout.ts) for g, t in zip(gains, taps))
    return ChannelSpec(paths, carrier_hz, layout)


def antenna_specs(spec, n_antennas, seed):
    """Per-antenna channels: every extra antenna sees each path with its own phase.

    Stands in for the array response of a second RF chain.
    """
    specs = [spec]
    for a in range(1, n_antennas):
        rng = np.random.default_rng([seed, 0xA7, a])
        rot = np.exp(1j * rng.uniform(0, TWO_PI, size=len(spec.paths)))
        paths = tuple(PathComponent(p.gain * r, p.delay) for p, r in zip(spec.paths, rot))
        specs.append(ChannelSpec(paths, spec.carrier_hz, spec.layout))
    return specs


def _moved(spec, motion, t):
    """Path weights and delays for every time in ``t``: arrays of shape (T, P)."""
    T = len(t)
    gains = np.tile(spec.gains, (T, 1))
    delays = np.tile(spec.delays, (T, 1))
    if motion is not None:
        m = motion.modulation(t)
        i = motion.target_path_index
        gains[:, i] *= 1.0 + motion.gain_amplitude * m
        delays[:, i] += motion.delay_amplitude_s * m
    return gains, delays


def _validate_motion(spec, motion):
    if motion is None:
        return
    if not 0 <= motion.target_path_index < len(spec.paths):
        raise ValueError("motion targets a path that does not exist")
    if motion.target_path_index == spec.dominant_index:
        raise ValueError("motion must not target the strongest (static) path")
    lo = spec.paths[motion.target_path_index].delay - motion.delay_amplitude_s
    if lo < 0:
        raise ValueError("motion would push the target path to a negative delay")


def simulate_trace(spec, motion, frame_times, ranges=DistortionRanges(), seed=0,
                   noise_std=0.0, n_antennas=1, epsilon_mode="independent"):
    """Multi-antenna distorted CSI trace of a (possibly breathing) scene.

    Frame ``i`` on antenna ``a`` draws its distortion and noise from the RNG
    substream ``(seed, i, a)``, so any subset of frames can be regenerated
    independently.  With ``epsilon_mode="shared"`` the delay shift comes from
    the substream ``(seed, i)`` and is common to all antennas.
    """
    t = np.asarray(frame_times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("frame_times must be a non-empty 1-D sequence")
    if np.any(np.diff(t) <= 0):
        raise ValueError("frame_times must be strictly increasing")
    if epsilon_mode not in ("independent", "shared"):
        raise ValueError("epsilon_mode must be 'independent' or 'shared'")
    _validate_motion(spec, motion)
    layout = spec.layout
    ts = layout.ts
    f = layout.freqs_hz
    T, K = t.size, layout.n_active

    csi = np.empty((n_antennas, T, K), dtype=np.complex128)
    draws = np.empty((n_antennas, T, 3))
    noise = np.zeros((n_antennas, T, K), dtype=np.complex128)
    for i in range(T):
        shared = None
        if epsilon_mode == "shared":
            shared = ranges.sample(np.random.default_rng([seed, i]), ts).epsilon
        for a in range(n_antennas):
            rng = np.random.default_rng([seed, i, a])
            d = ranges.sample(rng, ts)
            if shared is not None:
                d = DistortionDraw(d.beta, d.theta, shared)
            _check_draw(spec, d)
            draws[a, i] = (d.beta, d.theta, d.epsilon)
            if noise_std > 0:
                noise[a, i] = complex_noise(rng, noise_std, K)

    for a, sp in enumerate(antenna_specs(spec, n_antennas, seed)):
        gains, delays = _moved(sp, motion, t)
        w = gains * np.exp(-1j * TWO_PI * sp.carrier_hz * delays)
        factor = draws[a, :, 0] * np.exp(-1j * draws[a, :, 1])
        for p in range(w.shape[1]):
            tau = delays[:, p] + draws[a, :, 2]
            csi_p = np.exp(-1j * TWO_PI * np.outer(tau, f)) * (factor * w[:, p])[:, None]
            if p == 0:
                csi[a] = csi_p
            else:
                csi[a] += csi_p
    csi += noise

    rate = np.full(T, 60.0 * motion.rate_hz if motion is not None else 0.0)
    return Trace(layout, spec.carrier_hz, t, csi, true_rate_bpm=rate, draws=draws)


def respiration_trace(spec, motion, frame_times, distortion_ranges=DistortionRanges(),
                      rng_seed=0, noise_std=0.0):
    """Single-antenna breathing trace with per-frame ground truth.

    Returns one ``TraceSample(frame, draw, spec_at_t)`` per time.
    """
    trace = simulate_trace(spec, motion, frame_times, distortion_ranges, rng_seed, noise_std)
    gains, delays = _moved(spec, motion, trace.timestamps)
    out = []
    for i, t in enumerate(trace.timestamps):
        paths = tuple(PathComponent(g, d) for g, d in zip(gains[i], delays[i]))
        beta, theta, eps = trace.draws[0, i]
        out.append(TraceSample(
            CsiFrame(trace.csi[0, i], spec.layout, float(t)),
            DistortionDraw(beta, theta, eps),
            ChannelSpec(paths, spec.carrier_hz, spec.layout),
        ))
    return out


def frame_times(duration_s, fs_hz, start=0.0):
    n = int(round(duration_s * fs_hz))
    return start + np.arange(n) / fs_hz
