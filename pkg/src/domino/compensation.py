"""Dominant-path distortion compensation.

Hardware distortion scales, rotates and delays every path of a frame by the
same amount.  The strongest path is static, so:

1. shift the frame in delay until the first CIR tap holds as much power as
   possible (the dominant path lands on tap 0), then
2. divide every tap by tap 0, which cancels the common gain and phase.

Delay shifts are applied to the CSI as a per-subcarrier phase ramp, which
allows fractional shifts.

Sign convention: ``epsilon_est`` follows the alignment objective
``max |h[0 + eps']|`` whose optimum is ``eps' = -(tau_0 + epsilon) / ts``.
The CSI is moved by ``apply_delay_shift(frame, -epsilon_est)``, i.e. a
positive ``shift_taps`` pulls CIR energy toward tap 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cir_estimation import LsOperator, dft_submatrix
from .errors import DominantTapTooWeak, EmptySignal, LayoutMismatch
from .frames import Cir, CsiFrame, TapSet

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchConfig:
    """Alignment search and normalization guards.

    ``search_radius`` is in taps and defaults to N/4.  ``noise_floor`` is an
    absolute magnitude; ``dominant_floor_rel`` is relative to the median tap
    magnitude of the frame.  ``max_jump_taps`` enables the optional
    frame-to-frame smoother in :func:`compensate_batch`.

    ``objective`` picks the first-tap estimate being maximized: ``"pulse"``
    is the band-limited (zero-fill IDFT) tap, whose peak sits exactly on a
    lone path; ``"ls"`` is the operator's first row, which a support that
    starts at tap 0 biases toward negative delays.  After golden-section
    search, ``polish`` runs a few Newton steps on the analytic derivative so
    the optimum is located to rounding precision.
    """

    tol_taps: float = 1e-4
    search_radius: Optional[float] = None
    noise_floor: float = 1e-12
    dominant_floor_rel: float = 1e-3
    polish: bool = True
    max_jump_taps: Optional[float] = None
    coarse_oversample: int = 4
    objective: str = "pulse"

    def radius(self, layout):
        return layout.n_fft / 4 if self.search_radius is None else self.search_radius


@dataclass(frozen=True)
class AlignmentResult:
    epsilon_est: float
    peak_power: float
    n0: int


@dataclass(frozen=True, eq=False)
class CompensatedFrame:
    cir_norm: Cir
    alignment: AlignmentResult
    csi_norm: Optional[CsiFrame] = None


def _phase_slope(layout):
    return 2.0 * np.pi * layout.signed_active / layout.n_fft


def shift_values(values, layout, shift_taps):
    """Phase-ramp a ``(..., active)`` array; ``shift_taps`` broadcasts over leading axes."""
    s = np.asarray(shift_taps, dtype=float)[..., None]
    return np.asarray(values) * np.exp(1j * _phase_slope(layout) * s)


def apply_delay_shift(frame, shift_taps):
    """Move the frame's CIR by ``shift_taps`` toward tap 0: ``h'[n] = h[n + shift]``."""
    return frame.with_values(shift_values(frame.values, frame.layout, shift_taps))


class _FirstTap:
    """First-tap estimate of a frame stack after aligning row ``i`` by ``s[i]``.

    ``tap0(s) = sum_k w_k H_k exp(-j phi_k s)`` is a Laurent polynomial in
    ``z = exp(-j 2 pi s / N)``; large stacks are evaluated by Horner's rule,
    which avoids a (frames x subcarriers) complex exponential per call.
    """

    _HORNER_MIN_ROWS = 64

    def __init__(self, values, layout, w):
        self.n = layout.n_fft
        self.ks = layout.signed_active
        self.phi = 2.0 * np.pi * self.ks / self.n
        self.coef = values * w
        self.horner = values.shape[0] >= self._HORNER_MIN_ROWS
        self.k_lo = int(self.ks.min())
        self._dense = {}

    def _coefficients(self, order):
        coef = self.coef * (-1j * self.phi) ** order if order else self.coef
        if not self.horner:
            return coef
        if order not in self._dense:
            # one row per power of z, so every Horner step reads contiguous memory
            span = int(self.ks.max()) - self.k_lo + 1
            dense = np.zeros((span, coef.shape[0]), dtype=np.complex128)
            dense[self.ks - self.k_lo] = coef.T
            self._dense[order] = dense
        return self._dense[order]

    def _eval(self, order, s):
        coef = self._coefficients(order)
        if not self.horner:
            return (coef * np.exp(-1j * np.outer(s, self.phi))).sum(axis=-1)
        z = np.exp(-2j * np.pi * s / self.n)
        acc = coef[-1].copy()
        for row in coef[-2::-1]:
            acc *= z
            acc += row
        return acc * z ** self.k_lo

    def __call__(self, s):
        return self._eval(0, s)

    def derivs(self, s):
        """Value, first and second derivative with respect to ``s``."""
        return self._eval(0, s), self._eval(1, s), self._eval(2, s)


def _golden_max(f, a, b, tol):
    """Vectorized golden-section maximization of ``f`` on the brackets ``[a, b]``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while np.max(b - a) > tol:
        left = fc >= fd
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        c_new = np.where(left, b - _INVPHI * (b - a), d)
        d_new = np.where(left, c, a + _INVPHI * (b - a))
        probe = np.where(left, c_new, d_new)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_new, d_new
    return np.where(fc >= fd, c, d)


def _newton_polish(tap0, s, lo, hi, step_cap, iters=4):
    """Drive d|h0|^2/ds to zero; steps that leave the bracket or lose power are rejected."""
    for _ in range(iters):
        h0, h1, h2 = tap0.derivs(s)
        g1 = 2.0 * np.real(np.conj(h0) * h1)
        g2 = 2.0 * (np.abs(h1) ** 2 + np.real(np.conj(h0) * h2))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(g2 < 0, -g1 / g2, 0.0)
        step = np.clip(np.nan_to_num(step), -step_cap, step_cap)
        cand = np.clip(s + step, lo, hi)
        better = np.abs(tap0(cand)) >= np.abs(h0) * (1 - 1e-15)
        s = np.where(better, cand, s)
    return s


def coarse_peak(values, layout, oversample=4):
    """Nearest tap to the strongest point of the full-window IDFT, per row.

    The CIR is evaluated on a grid ``oversample`` times finer than the taps
    so a dominant path halfway between taps is not outvoted by two weaker
    paths sharing one tap.  Returns signed tap indices and peak magnitudes.
    """
    m = layout.n_fft * oversample
    values = np.atleast_2d(values)
    full = np.zeros((values.shape[0], m), dtype=np.complex128)
    full[:, layout.signed_active % m] = values
    mag = np.abs(np.fft.ifft(full, axis=-1)) * (m / np.sqrt(layout.n_fft))
    i = np.argmax(mag, axis=-1)
    pos = np.where(i > m // 2, i - m, i) / oversample
    n0 = (np.sign(pos) * np.floor(np.abs(pos) + 0.5)).astype(np.int64)
    return n0, mag.max(axis=-1)


def objective_weights(op, objective="pulse"):
    if objective == "ls":
        return op.first_row
    if objective == "pulse":
        layout = op.layout
        return np.full(layout.n_active, 1.0 / np.sqrt(layout.n_fft), dtype=np.complex128)
    raise ValueError(f"unknown alignment objective {objective!r}")


def align_batch(values, layout, op, cfg=SearchConfig()):
    """Alignment for a ``(frames, active)`` stack: returns ``(epsilon_est, peak_power, n0)``."""
    values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
    if op.tapset.taps[0] != 0:
        raise ValueError("alignment needs tap 0 in the operator's tap set")
    n0, peak = coarse_peak(values, layout, cfg.coarse_oversample)
    if np.any(peak < cfg.noise_floor):
        bad = int(np.flatnonzero(peak < cfg.noise_floor)[0])
        raise EmptySignal(f"frame {bad}: every tap is below the noise floor {cfg.noise_floor:g}")
    radius = cfg.radius(layout)
    tap0 = _FirstTap(values, layout, objective_weights(op, cfg.objective))
    start = np.clip(-n0.astype(float), -radius, radius)
    lo = np.clip(start - 1.0, -radius, radius)
    hi = np.clip(start + 1.0, -radius, radius)

    def power(s):
        return np.abs(tap0(s)) ** 2

    s = _golden_max(power, lo, hi, cfg.tol_taps)
    if cfg.polish:
        s = _newton_polish(tap0, s, lo, hi, step_cap=max(4 * cfg.tol_taps, 1e-6))
    p = power(s)
    p_start = power(start)
    keep_start = p_start > p
    s = np.where(keep_start, start, s)
    p = np.where(keep_start, p_start, p)
    return s, p, n0


def estimate_alignment(frame, op, cfg=SearchConfig()):
    if frame.layout != op.layout:
        raise LayoutMismatch("frame layout differs from the operator's layout")
    s, p, n0 = align_batch(frame.values[None, :], frame.layout, op, cfg)
    return AlignmentResult(float(s[0]), float(p[0]), int(n0[0]))


def dominant_floor(taps, cfg=SearchConfig()):
    mags = np.abs(np.atleast_2d(taps))
    return np.maximum(cfg.noise_floor, cfg.dominant_floor_rel * np.median(mags, axis=-1))


def normalize_batch(taps, cfg=SearchConfig()):
    """Divide each row by its first tap; the first column is exactly 1."""
    taps = np.atleast_2d(np.asarray(taps, dtype=np.complex128))
    floor = dominant_floor(taps, cfg)
    weak = np.abs(taps[:, 0]) < floor
    if np.any(weak):
        i = int(np.flatnonzero(weak)[0])
        raise DominantTapTooWeak(
            f"frame {i}: |h[0]| = {abs(taps[i, 0]):.3g} below floor {floor[i]:.3g}"
        )
    out = taps / taps[:, :1]
    out[:, 0] = 1.0
    return out


def dominant_path_normalize(cir, cfg=SearchConfig()):
    """``h'[n] = h[n] / h[0]``; cancels any gain and phase common to all taps."""
    return Cir(normalize_batch(cir.taps[None, :], cfg)[0], cir.ts, cir.indices)


def smooth_alignment(eps, max_jump_taps):
    """Clamp frame-to-frame changes of the alignment shift to ``max_jump_taps``."""
    smoother = AlignmentSmoother(max_jump_taps)
    return np.array([smoother.update(e) for e in np.asarray(eps, dtype=float)])


class AlignmentSmoother:
    """Stateful per-stream clamp on alignment jumps.  One instance per antenna stream."""

    def __init__(self, max_jump_taps=0.5):
        self.max_jump_taps = max_jump_taps
        self.last = None

    def update(self, eps):
        if self.last is not None:
            eps = self.last + float(np.clip(eps - self.last, -self.max_jump_taps, self.max_jump_taps))
        self.last = float(eps)
        return self.last


def idft_operator(layout, tapset=None):
    """Linear operator giving the zero-fill IDFT taps on ``tapset``.

    Plugging this in place of the LS operator yields the IDFT ablation of
    the compensator.
    """
    tapset = TapSet.contiguous(32) if tapset is None else tapset
    matrix = dft_submatrix(layout, tapset).conj().T
    return LsOperator(np.ascontiguousarray(matrix), layout, tapset, float("nan"))


def compensate_batch(values, op, cfg=SearchConfig()):
    """Compensate a ``(frames, active)`` stack.

    Returns ``(cir_norm, epsilon_est, peak_power, n0)`` with ``cir_norm`` of
    shape ``(frames, len(op.tapset))``.
    """
    layout = op.layout
    values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
    if values.shape[-1] != layout.n_active:
        raise LayoutMismatch("values do not match the operator's layout")
    eps, peak, n0 = align_batch(values, layout, op, cfg)
    if cfg.max_jump_taps is not None:
        eps = smooth_alignment(eps, cfg.max_jump_taps)
    aligned = shift_values(values, layout, -eps)
    cir = normalize_batch(op.apply(aligned), cfg)
    return cir, eps, peak, n0


def compensate_frame(frame, op, cfg=SearchConfig(), with_csi=False):
    """Align, re-estimate, normalize.  ``with_csi`` also maps the taps back to CSI."""
    if frame.layout != op.layout:
        raise LayoutMismatch("frame layout differs from the operator's layout")
    cir, eps, peak, n0 = compensate_batch(frame.values[None, :], op, cfg)
    cir_norm = Cir(cir[0], frame.layout.ts, op.tapset.array)
    csi_norm = None
    if with_csi:
        csi_norm = CsiFrame(dft_submatrix(frame.layout, op.tapset) @ cir[0], frame.layout, frame.timestamp)
    return CompensatedFrame(cir_norm, AlignmentResult(float(eps[0]), float(peak[0]), int(n0[0])), csi_norm)
