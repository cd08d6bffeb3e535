"""Data containers: subcarrier layouts, tap sets, CSI frames and CIRs.

Subcarrier indices are stored unsigned in ``[0, N)`` like FFT bins.  Every
physical computation uses the *signed* index ``k_s`` (``k - N`` for
``k >= N/2``) so that baseband frequency is ``k_s * delta_f``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import LayoutMismatch


def _frozen(a, dtype=None):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SubcarrierLayout:
    """Which of the ``n_fft`` DFT bins carry measured CSI."""

    n_fft: int
    active: tuple
    delta_f_hz: float

    def __post_init__(self):
        active = tuple(int(k) for k in self.active)
        object.__setattr__(self, "active", active)
        if self.n_fft <= 0:
            raise ValueError("n_fft must be positive")
        if not active:
            raise ValueError("active subcarrier set is empty")
        if any(b <= a for a, b in zip(active, active[1:])):
            raise ValueError("active indices must be sorted and unique")
        if active[0] < 0 or active[-1] >= self.n_fft:
            raise ValueError("active indices must lie in [0, n_fft)")
        if self.delta_f_hz <= 0:
            raise ValueError("delta_f_hz must be positive")

    @classmethod
    def symmetric(cls, n_fft=256, half_width=117, delta_f_hz=625e3, dc_null=True):
        """Band of ``±half_width`` subcarriers around DC with guard bands at the edges."""
        if not 0 < half_width < n_fft // 2:
            raise ValueError("half_width must be in (0, n_fft/2)")
        lo = 1 if dc_null else 0
        pos = np.arange(lo, half_width + 1)
        neg = np.arange(n_fft - half_width, n_fft)
        return cls(n_fft, tuple(np.concatenate([pos, neg])), delta_f_hz)

    @classmethod
    def full(cls, n_fft=256, delta_f_hz=625e3):
        return cls(n_fft, tuple(range(n_fft)), delta_f_hz)

    @property
    def ts(self):
        """Tap spacing in seconds, ``1 / (N * delta_f)``."""
        return 1.0 / (self.n_fft * self.delta_f_hz)

    @property
    def n_active(self):
        return len(self.active)

    @cached_property
    def active_array(self):
        return _frozen(self.active, dtype=np.int64)

    @cached_property
    def signed_active(self):
        k = self.active_array
        return _frozen(np.where(k >= self.n_fft // 2, k - self.n_fft, k))

    @cached_property
    def freqs_hz(self):
        """Baseband frequency of each active subcarrier."""
        return _frozen(self.signed_active * self.delta_f_hz)

    def position_of(self, subcarrier):
        """Column of ``subcarrier`` in a frame's value vector, or ``None``."""
        i = int(np.searchsorted(self.active_array, subcarrier))
        if i < self.n_active and self.active[i] == subcarrier:
            return i
        return None


@dataclass(frozen=True)
class TapSet:
    taps: tuple

    def __post_init__(self):
        taps = tuple(int(t) for t in self.taps)
        object.__setattr__(self, "taps", taps)
        if not taps:
            raise ValueError("tap set is empty")
        if any(b <= a for a, b in zip(taps, taps[1:])):
            raise ValueError("tap indices must be sorted and unique")
        if taps[0] < 0:
            raise ValueError("tap indices must be non-negative")

    @classmethod
    def contiguous(cls, n_taps=32, start=0):
        return cls(tuple(range(start, start + n_taps)))

    def __len__(self):
        return len(self.taps)

    @cached_property
    def array(self):
        return _frozen(self.taps, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class CsiFrame:
    """Complex channel response on the active subcarriers of one packet."""

    values: np.ndarray
    layout: SubcarrierLayout
    timestamp: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values, dtype=np.complex128)
        if values.shape != (self.layout.n_active,):
            raise LayoutMismatch(
                f"frame has {values.shape} values, layout has {self.layout.n_active} active subcarriers"
            )
        object.__setattr__(self, "values", values)

    def with_values(self, values):
        return CsiFrame(values, self.layout, self.timestamp)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if other.layout != self.layout:
            raise LayoutMismatch("cannot add frames with different layouts")
        return self.with_values(self.values + other.values)


@dataclass(frozen=True, eq=False)
class Cir:
    """Complex delay-domain taps; ``indices[i]`` is the tap number of ``taps[i]``."""

    taps: np.ndarray
    ts: float
    indices: np.ndarray = field(default=None)

    def __post_init__(self):
        taps = _frozen(self.taps, dtype=np.complex128)
        if not np.all(np.isfinite(taps)):
            raise ValueError("CIR taps must be finite")
        idx = np.arange(taps.size) if self.indices is None else self.indices
        idx = _frozen(idx, dtype=np.int64)
        if idx.shape != taps.shape:
            raise ValueError("indices and taps differ in length")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.taps.size

    def __getitem__(self, i):
        return self.taps[i]


def stack_values(frames):
    """Stack a sequence of frames into a ``(n_frames, n_active)`` array."""
    frames = list(frames)
    if not frames:
        raise ValueError("no frames")
    layout = frames[0].layout
    for f in frames[1:]:
        if f.layout != layout:
            raise LayoutMismatch("frames do not share one layout")
    return np.stack([f.values for f in frames]), layout


@dataclass(frozen=True, eq=False)
class Trace:
    """A recorded or simulated capture: ``csi`` has shape (antennas, frames, active).

    ``true_rate_bpm`` (per frame) and ``draws`` (antennas, frames, 3) holding
    ``(beta, theta, epsilon)`` are present only for synthetic traces.
    """

    layout: SubcarrierLayout
    carrier_hz: float
    timestamps: np.ndarray
    csi: np.ndarray
    true_rate_bpm: np.ndarray = None
    draws: np.ndarray = None

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.float64)
        csi = np.asarray(self.csi, dtype=np.complex128)
        if csi.ndim != 3 or csi.shape[1:] != (t.size, self.layout.n_active):
            raise LayoutMismatch(f"csi shape {csi.shape} does not match timestamps/layout")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "csi", csi)
        if (self.true_rate_bpm is None) != (self.draws is None):
            raise ValueError("ground truth needs both true_rate_bpm and draws")
        if self.draws is not None:
            object.__setattr__(self, "true_rate_bpm", np.asarray(self.true_rate_bpm, dtype=np.float64))
            object.__setattr__(self, "draws", np.asarray(self.draws, dtype=np.float64))
            if self.true_rate_bpm.shape != (t.size,) or self.draws.shape != csi.shape[:2] + (3,):
                raise ValueError("ground-truth block does not match the trace shape")

    @property
    def n_antennas(self):
        return self.csi.shape[0]

    @property
    def n_frames(self):
        return self.csi.shape[1]

    @property
    def has_truth(self):
        return self.draws is not None

    @property
    def fs_hz(self):
        if self.n_frames < 2:
            raise ValueError("sampling rate needs at least two frames")
        return (self.n_frames - 1) / (self.timestamps[-1] - self.timestamps[0])

    def frames(self, antenna=0):
        return [CsiFrame(v, self.layout, float(t)) for v, t in zip(self.csi[antenna], self.timestamps)]
