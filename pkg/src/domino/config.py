"""Flat ``key = value`` run configuration.

One setting per line, ``#`` starts a comment, lists are comma separated.
Every value is validated on load and errors name the offending line.
``preset = desk | paper-like`` picks defaults that explicit keys override,
wherever the preset line appears.

Keys (defaults are the ``desk`` preset)::

    n_fft = 256                  active_half_width = 117
    delta_f_hz = 625e3           carrier_hz = 5.25e9
    path_delays_taps = 3.3, 7.9, 12.6
    path_gains = 1.0, 0.45, 0.3  path_phases_rad = 0, 0.7, -2.1
    motion_path = 1              motion_delay_amplitude_s = 2.5e-11
    motion_gain_amplitude = 0.2  rate_bpm = 15        (0 disables motion)
    fs_hz = 50                   duration_s = 60
    n_antennas = 2               snr_db = 20          (inf for noiseless)
    epsilon_mode = independent   seed = 0
    beta_range = 0.5, 2          theta_range = 0, 6.283185307179586
    epsilon_range_taps = -2, 2
    n_taps = 32                  ridge = auto
    tol_taps = 1e-4              band_hz = 0.1, 0.5
    bench_rates_bpm = 12, 15, 18 bench_snr_db = 20, 10, 0
    bench_epsilon_max_taps = 2   bench_seeds = 2
    bench_schemes = domino, domino-idft, double-ratio, csi-ratio, raw
    accept_domino_mean_bpm = 0.5 accept_ordering = true
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .channel_model import (
    ChannelSpec,
    DistortionRanges,
    MotionModel,
    PathComponent,
    noise_std_for_snr,
)
from .compensation import SearchConfig
from .errors import ConfigError
from .frames import SubcarrierLayout
from .pipeline import SCHEMES, PipelineConfig

PRESETS = {
    "desk": {},
    "paper-like": {"fs_hz": 200.0},
}


@dataclass(frozen=True)
class RunConfig:
    n_fft: int = 256
    active_half_width: int = 117
    delta_f_hz: float = 625e3
    carrier_hz: float = 5.25e9
    path_delays_taps: tuple = (3.3, 7.9, 12.6)
    path_gains: tuple = (1.0, 0.45, 0.3)
    path_phases_rad: tuple = (0.0, 0.7, -2.1)
    motion_path: int = 1
    motion_delay_amplitude_s: float = 2.5e-11
    motion_gain_amplitude: float = 0.2
    rate_bpm: float = 15.0
    fs_hz: float = 50.0
    duration_s: float = 60.0
    n_antennas: int = 2
    snr_db: float = 20.0
    epsilon_mode: str = "independent"
    beta_range: tuple = (0.5, 2.0)
    theta_range: tuple = (0.0, 2.0 * math.pi)
    epsilon_range_taps: tuple = (-2.0, 2.0)
    seed: int = 0
    n_taps: int = 32
    ridge: float = None
    tol_taps: float = 1e-4
    band_hz: tuple = (0.1, 0.5)
    bench_rates_bpm: tuple = (12.0, 15.0, 18.0)
    bench_snr_db: tuple = (20.0, 10.0, 0.0)
    bench_epsilon_max_taps: tuple = (2.0,)
    bench_seeds: int = 2
    bench_schemes: tuple = SCHEMES
    accept_domino_mean_bpm: float = 0.5
    accept_ordering: bool = True
    preset: str = "desk"

    def layout(self):
        return SubcarrierLayout.symmetric(self.n_fft, self.active_half_width, self.delta_f_hz)

    def channel(self):
        layout = self.layout()
        paths = tuple(
            PathComponent(g * np.exp(1j * ph), d * layout.ts)
            for d, g, ph in zip(self.path_delays_taps, self.path_gains, self.path_phases_rad)
        )
        return ChannelSpec(paths, self.carrier_hz, layout)

    def motion(self, rate_bpm=None):
        rate = self.rate_bpm if rate_bpm is None else rate_bpm
        if rate == 0:
            return None
        return MotionModel(self.motion_path, self.motion_delay_amplitude_s,
                           self.motion_gain_amplitude, rate / 60.0)

    def distortion_ranges(self, epsilon_max_taps=None):
        eps = self.epsilon_range_taps
        if epsilon_max_taps is not None:
            eps = (-epsilon_max_taps, epsilon_max_taps)
        return DistortionRanges(self.beta_range, self.theta_range, eps)

    def noise_std(self, snr_db=None):
        snr = self.snr_db if snr_db is None else snr_db
        return 0.0 if math.isinf(snr) else noise_std_for_snr(self.channel(), snr)

    def pipeline(self):
        return PipelineConfig(n_taps=self.n_taps, ridge=self.ridge,
                              search=SearchConfig(tol_taps=self.tol_taps), band=self.band_hz)


def _float(s):
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _finite(s):
    v = _float(s)
    if math.isinf(v):
        raise ValueError("value must be finite")
    return v


def _positive(s):
    v = _finite(s)
    if v <= 0:
        raise ValueError("value must be positive")
    return v


def _nonneg(s):
    v = _finite(s)
    if v < 0:
        raise ValueError("value must be non-negative")
    return v


def _int(lo):
    def parse(s):
        v = int(s)
        if v < lo:
            raise ValueError(f"value must be at least {lo}")
        return v
    return parse


def _list(item, min_len=1, exact=None):
    def parse(s):
        parts = [p.strip() for p in s.split(",")]
        if parts == [""]:
            parts = []
        vals = tuple(item(p) for p in parts)
        if exact is not None and len(vals) != exact:
            raise ValueError(f"expected {exact} comma-separated values, got {len(vals)}")
        if len(vals) < min_len:
            raise ValueError(f"expected at least {min_len} value(s)")
        return vals
    return parse


def _range(s):
    lo, hi = _list(_finite, exact=2)(s)
    if lo > hi:
        raise ValueError("range low end exceeds high end")
    return (lo, hi)


def _choice(options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    return parse


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected true or false")


def _ridge(s):
    return None if s == "auto" else _nonneg(s)


def _scheme(s):
    return _choice(SCHEMES)(s)


_PARSERS = {
    "n_fft": _int(2),
    "active_half_width": _int(1),
    "delta_f_hz": _positive,
    "carrier_hz": _nonneg,
    "path_delays_taps": _list(_nonneg),
    "path_gains": _list(_positive),
    "path_phases_rad": _list(_finite),
    "motion_path": _int(0),
    "motion_delay_amplitude_s": _nonneg,
    "motion_gain_amplitude": _nonneg,
    "rate_bpm": _nonneg,
    "fs_hz": _positive,
    "duration_s": _positive,
    "n_antennas": _int(1),
    "snr_db": _float,
    "epsilon_mode": _choice(("independent", "shared")),
    "beta_range": _range,
    "theta_range": _range,
    "epsilon_range_taps": _range,
    "seed": _int(0),
    "n_taps": _int(1),
    "ridge": _ridge,
    "tol_taps": _positive,
    "band_hz": _range,
    "bench_rates_bpm": _list(_positive, min_len=0),
    "bench_snr_db": _list(_float, min_len=0),
    "bench_epsilon_max_taps": _list(_nonneg, min_len=0),
    "bench_seeds": _int(0),
    "bench_schemes": _list(_scheme, min_len=0),
    "accept_domino_mean_bpm": _positive,
    "accept_ordering": _bool,
    "preset": _choice(tuple(PRESETS)),
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def _check_whole(cfg, lines):
    """Cross-field checks, reported against the line of the last key involved."""
    def fail(msg, *keys):
        ln = max((lines[k] for k in keys if k in lines), default=None)
        raise ConfigError(msg, ln)

    n = len(cfg.path_delays_taps)
    if not (len(cfg.path_gains) == n == len(cfg.path_phases_rad)):
        fail("path_delays_taps, path_gains and path_phases_rad need equal lengths",
             "path_delays_taps", "path_gains", "path_phases_rad")
    try:
        layout = cfg.layout()
    except ValueError as exc:
        fail(str(exc), "n_fft", "active_half_width")
    try:
        spec = cfg.channel()
    except ValueError as exc:
        fail(str(exc), "path_delays_taps", "n_fft")
    if cfg.rate_bpm > 0:
        try:
            motion = cfg.motion()
        except ValueError as exc:
            fail(str(exc), "rate_bpm", "motion_gain_amplitude", "motion_delay_amplitude_s")
        if not 0 <= motion.target_path_index < n:
            fail("motion_path names a path that does not exist", "motion_path")
        if motion.target_path_index == spec.dominant_index:
            fail("motion_path must not be the strongest path", "motion_path", "path_gains")
        if spec.paths[cfg.motion_path].delay < cfg.motion_delay_amplitude_s:
            fail("motion would push its path to a negative delay", "motion_delay_amplitude_s")
    if cfg.beta_range[0] <= 0:
        fail("beta_range must be positive", "beta_range")
    quarter = layout.n_fft / 4
    eps_max = max([abs(e) for e in cfg.epsilon_range_taps] + list(cfg.bench_epsilon_max_taps))
    if eps_max >= quarter:
        fail(f"delay shifts must stay under n_fft/4 = {quarter:g} taps",
             "epsilon_range_taps", "bench_epsilon_max_taps")
    if cfg.n_taps > layout.n_active:
        fail("n_taps exceeds the number of active subcarriers", "n_taps")
    if not cfg.fs_hz > 2 * cfg.band_hz[1]:
        fail("fs_hz must exceed twice the upper band edge", "fs_hz", "band_hz")
    if cfg.band_hz[0] == cfg.band_hz[1]:
        fail("band_hz must be a non-empty interval", "band_hz")
    for r in cfg.bench_rates_bpm + ((cfg.rate_bpm,) if cfg.rate_bpm else ()):
        if not cfg.band_hz[0] <= r / 60.0 <= cfg.band_hz[1]:
            fail(f"rate {r:g} bpm lies outside band_hz", "rate_bpm", "bench_rates_bpm", "band_hz")


def parse_config(text):
    """Parse configuration text into a validated :class:`RunConfig`."""
    values, lines = {}, {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", ln)
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", ln)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", ln)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", ln) from None
        lines[key] = ln
    preset = values.get("preset", "desk")
    cfg = replace(RunConfig(), **{**PRESETS[preset], **values})
    _check_whole(cfg, lines)
    return cfg


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
