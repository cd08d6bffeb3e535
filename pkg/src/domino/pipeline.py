"""Compose compensation schemes with the respiration estimator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import baselines
from .cir_estimation import build_ls_operator
from .compensation import SearchConfig, compensate_batch, idft_operator
from .errors import DominoError, NoPeak
from .frames import TapSet
from .respiration import DEFAULT_BAND, detrend, estimate_rate, select_signal

SCHEMES = ("domino", "domino-idft", "double-ratio", "csi-ratio", "raw")


class SchemeError(DominoError, ValueError):
    """The trace cannot feed the requested scheme (e.g. one antenna for csi-ratio)."""


@dataclass(frozen=True)
class PipelineConfig:
    n_taps: int = 32
    ridge: float = None
    search: SearchConfig = SearchConfig()
    band: tuple = DEFAULT_BAND
    min_swing_rel: float = 0.5


@dataclass(frozen=True, eq=False)
class SchemeOutput:
    """Compensated series ``values`` (frames, channels); ``channels`` labels each column."""

    scheme: str
    values: np.ndarray
    channels: np.ndarray


@dataclass(frozen=True)
class Respiration:
    scheme: str
    bpm: float
    confidence: float
    channel: int
    periodicity: float


def operator_for(layout, scheme, cfg=PipelineConfig()):
    tapset = TapSet.contiguous(cfg.n_taps)
    if scheme == "domino":
        return build_ls_operator(layout, tapset, cfg.ridge)
    if scheme == "domino-idft":
        return idft_operator(layout, tapset)
    raise SchemeError(f"{scheme!r} does not use a CIR operator")


def scheme_series(trace, scheme, cfg=PipelineConfig(), antenna=0):
    """Run one compensation scheme over a trace."""
    if scheme not in SCHEMES:
        raise SchemeError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    if scheme in ("domino", "domino-idft"):
        op = operator_for(trace.layout, scheme, cfg)
        cir, *_ = compensate_batch(trace.csi[antenna], op, cfg.search)
        return SchemeOutput(scheme, cir, op.tapset.array)
    frames = trace.frames(antenna)
    if scheme == "csi-ratio":
        if trace.n_antennas < 2:
            raise SchemeError("csi-ratio needs a trace with at least two antennas")
        out = baselines.csi_ratio(frames, trace.frames(1 if antenna == 0 else 0))
    elif scheme == "double-ratio":
        out = baselines.double_ratio(frames)
    else:
        out = baselines.raw_magnitude(frames)
    return SchemeOutput(scheme, out.values, trace.layout.active_array)


def swing_candidates(values, fs, min_swing_rel=0.5):
    """Columns whose detrended magnitude swings at least ``min_swing_rel`` of the largest.

    The periodicity score is a ratio, so without this gate a column that
    barely moves (leakage where the breathing fundamental cancels, leaving
    only a harmonic) can outscore the column that actually carries motion.
    """
    swing = detrend(np.abs(values), fs).std(axis=0)
    cand = np.flatnonzero(swing >= min_swing_rel * swing.max())
    return cand if cand.size else np.arange(values.shape[1])


def respire(trace, scheme, cfg=PipelineConfig(), antenna=0, strict=False):
    """Select the most periodic channel of a scheme's output and estimate its rate.

    Only columns passing :func:`swing_candidates` compete in selection.
    With ``strict=False`` a weak peak still yields its frequency (confidence
    is reported) instead of raising ``NoPeak``.
    """
    out = scheme_series(trace, scheme, cfg, antenna)
    values = out.values
    if scheme.startswith("domino"):
        # tap 0 is the reference and constant by construction
        values = values[:, 1:]
    fs = trace.fs_hz
    cand = swing_candidates(values, fs, cfg.min_swing_rel)
    sel = select_signal(values[:, cand], fs, cfg.band)
    col = int(cand[sel.index])
    try:
        est = estimate_rate(np.abs(values[:, col]), fs, cfg.band)
    except NoPeak:
        if strict:
            raise
        est = estimate_rate(np.abs(values[:, col]), fs, cfg.band, min_confidence=0.0)
    offset = 1 if scheme.startswith("domino") else 0
    return Respiration(scheme, est.bpm, est.confidence, int(out.channels[col + offset]),
                       sel.periodicity_score)
