"""Respiration-rate estimation from compensated tap or subcarrier series.

A single spectral estimator is used for every compensation scheme so the
benchmark compares compensators, not estimators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import get_window

from .errors import LengthMismatch, NoPeak, TooShort

DEFAULT_BAND = (0.1, 0.5)
MIN_DURATION_S = 30.0
DETREND_WINDOW_S = 10.0
ZERO_PAD = 8
MIN_CONFIDENCE = 3.0


@dataclass(frozen=True)
class SignalSelection:
    index: int
    periodicity_score: float
    scores: np.ndarray = None


@dataclass(frozen=True)
class RateEstimate:
    bpm: float
    confidence: float


@dataclass(frozen=True, eq=False)
class ErrorStats:
    samples: np.ndarray
    median: float
    mean: float
    p80: float

    def cdf(self):
        """Sorted ``(error, fraction)`` pairs of the empirical CDF."""
        x = np.sort(self.samples)
        return list(zip(x.tolist(), (np.arange(1, x.size + 1) / x.size).tolist()))


def _check(n_samples, fs, band):
    f_lo, f_hi = band
    if not 0 <= f_lo < f_hi:
        raise ValueError("band must satisfy 0 <= f_lo < f_hi")
    if not fs > 2 * f_hi:
        raise ValueError("sampling rate must exceed twice the band's upper edge")
    if n_samples < MIN_DURATION_S * fs - 1e-9:
        raise TooShort(f"{n_samples / fs:.1f} s of data, need {MIN_DURATION_S:.0f} s")


def detrend(x, fs, window_s=DETREND_WINDOW_S):
    """Subtract a moving mean along axis 0."""
    x = np.asarray(x, dtype=float)
    size = max(1, int(round(window_s * fs)))
    return x - uniform_filter1d(x, size=size, axis=0, mode="nearest")


def periodicity_scores(series, fs, band=DEFAULT_BAND):
    """In-band share of the detrended power of ``|series|``, one score per column."""
    mag = np.abs(np.asarray(series))
    if mag.ndim == 1:
        mag = mag[:, None]
    _check(mag.shape[0], fs, band)
    spec = np.abs(np.fft.rfft(detrend(mag, fs), axis=0)) ** 2
    f = np.fft.rfftfreq(mag.shape[0], 1.0 / fs)
    in_band = (f >= band[0]) & (f <= band[1])
    total = spec.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(total > 0, spec[in_band].sum(axis=0) / total, 0.0)
    return scores


def select_signal(series, fs, band=DEFAULT_BAND):
    """Column whose magnitude is most periodic in ``band``; ties go to the lowest index."""
    scores = periodicity_scores(series, fs, band)
    i = int(np.argmax(scores))
    return SignalSelection(i, float(scores[i]), scores)


def _parabolic_offset(y_m, y_0, y_p):
    denom = y_m - 2.0 * y_0 + y_p
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (y_m - y_p) / denom, -0.5, 0.5))


def estimate_rate(signal, fs, band=DEFAULT_BAND, min_confidence=MIN_CONFIDENCE):
    """Breathing rate of a real series from the interpolated spectral peak in ``band``.

    Raises ``NoPeak`` when the peak-to-median spectral ratio is under
    ``min_confidence``; pass ``min_confidence=0`` to always get the peak.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    _check(x.size, fs, band)
    x = detrend(x, fs)
    x = (x - x.mean()) * get_window("hann", x.size, fftbins=False)
    nfft = 1 << int(np.ceil(np.log2(ZERO_PAD * x.size)))
    mag = np.abs(np.fft.rfft(x, nfft))
    f = np.fft.rfftfreq(nfft, 1.0 / fs)
    in_band = np.flatnonzero((f >= band[0]) & (f <= band[1]))
    k = int(in_band[np.argmax(mag[in_band])])
    median = np.median(mag[1:])
    confidence = float(mag[k] / median) if median > 0 else (np.inf if mag[k] > 0 else 0.0)
    if not confidence >= min_confidence:
        raise NoPeak(f"peak-to-median ratio {confidence:.2f} below {min_confidence:g}")
    offset = _parabolic_offset(mag[k - 1], mag[k], mag[k + 1]) if 0 < k < mag.size - 1 else 0.0
    f_peak = float(np.clip(f[k] + offset * (f[1] - f[0]), band[0], band[1]))
    return RateEstimate(60.0 * f_peak, confidence)


def error_stats(estimates, truths):
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    if est.shape != tru.shape:
        raise LengthMismatch(f"{est.size} estimates vs {tru.size} truths")
    if est.size == 0:
        raise ValueError("need at least one estimate")
    err = np.abs(est - tru)
    return ErrorStats(
        samples=err,
        median=float(np.percentile(err, 50)),
        mean=float(err.mean()),
        p80=float(np.percentile(err, 80)),
    )
