"""Reference compensation schemes: CSI ratio, double ratio and raw magnitude.

Each returns a :class:`RatioSeries` of shape (frames, active subcarriers).
Entries whose denominator falls under a guard floor are masked: set to 0
and flagged in ``valid``, so no inf/nan ever leaves this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LayoutMismatch, LengthMismatch, RefNotActive
from .frames import stack_values

GUARD_REL = 1e-6
REF_CALIBRATION_FRAMES = 100
SCHEMES = ("csi_ratio", "double_ratio", "raw")


@dataclass(frozen=True, eq=False)
class RatioSeries:
    values: np.ndarray
    valid: np.ndarray
    scheme: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.values.shape != self.valid.shape:
            raise ValueError("values and mask differ in shape")

    @property
    def magnitude(self):
        return np.abs(self.values)


def _guarded_divide(num, den, scale_frames, guard_rel):
    """``num / den`` with entries masked where ``|den|`` is under the frame's guard floor."""
    floor = guard_rel * np.median(np.abs(scale_frames), axis=-1, keepdims=True)
    num, den = np.broadcast_arrays(num, den)
    valid = (np.abs(den) >= floor) & np.isfinite(num) & np.isfinite(den)
    out = np.zeros(num.shape, dtype=np.complex128)
    np.divide(num, den, out=out, where=valid)
    return out, valid


def csi_ratio(frames_a, frames_b, guard_rel=GUARD_REL):
    """Per-subcarrier ratio between two antennas of the same packet."""
    frames_a, frames_b = list(frames_a), list(frames_b)
    if len(frames_a) != len(frames_b):
        raise LengthMismatch(f"{len(frames_a)} frames on antenna A, {len(frames_b)} on B")
    a, layout_a = stack_values(frames_a)
    b, layout_b = stack_values(frames_b)
    if layout_a != layout_b:
        raise LayoutMismatch("antennas report different subcarrier layouts")
    ta = np.array([f.timestamp for f in frames_a])
    tb = np.array([f.timestamp for f in frames_b])
    if not np.array_equal(ta, tb):
        raise LengthMismatch("antenna streams are not paired frame by frame")
    values, valid = _guarded_divide(a, b, b, guard_rel)
    return RatioSeries(values, valid, "csi_ratio")


def default_reference(values, n_calibration=REF_CALIBRATION_FRAMES):
    """Column with the highest mean magnitude over the first calibration frames."""
    return int(np.argmax(np.abs(values[:n_calibration]).mean(axis=0)))


def double_ratio(frames, ref_subcarrier=None, guard_rel=GUARD_REL):
    """Divide every subcarrier by a reference subcarrier of the same frame.

    ``ref_subcarrier`` is a DFT bin index; by default the strongest active
    subcarrier over the calibration window.  Its own column is masked.
    """
    values, layout = stack_values(frames)
    if ref_subcarrier is None:
        col = default_reference(values)
    else:
        col = layout.position_of(ref_subcarrier)
        if col is None:
            raise RefNotActive(f"subcarrier {ref_subcarrier} is not active")
    out, valid = _guarded_divide(values, values[:, col:col + 1], values, guard_rel)
    out[:, col] = 0.0
    valid[:, col] = False
    return RatioSeries(out, valid, "double_ratio")


def raw_magnitude(frames):
    """Uncompensated ``|H[k]|``: the control arm."""
    values, _ = stack_values(frames)
    mag = np.abs(values)
    return RatioSeries(mag, np.isfinite(mag), "raw")
