"""Binary CSI trace files (``.dcsi``).

All fields little-endian::

    magic        4s    b"DCSI"
    version      u16   1
    flags        u16   bit 0: ground-truth block present
    n_fft        u32
    delta_f_hz   f64
    carrier_hz   f64
    n_active     u32
    active       u32 x n_active      sorted, unique, < n_fft
    n_antennas   u16
    n_frames     u32
    records      n_frames x (timestamp f64, n_antennas x n_active x (re f64, im f64))
    truth        n_frames x (true_rate_bpm f64, n_antennas x (beta, theta, epsilon) f64)

Converters from vendor capture formats only need to fill these fields.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import TraceFormatError
from .frames import SubcarrierLayout, Trace

MAGIC = b"DCSI"
VERSION = 1
FLAG_TRUTH = 0x1

_HEAD = struct.Struct("<4sHHIddI")
_TAIL = struct.Struct("<HI")


def _record_dtype(n_antennas, n_active):
    return np.dtype([("t", "<f8"), ("csi", "<f8", (n_antennas, n_active, 2))])


def _truth_dtype(n_antennas):
    return np.dtype([("rate", "<f8"), ("draws", "<f8", (n_antennas, 3))])


def encode_trace(trace):
    layout = trace.layout
    A, T, K = trace.csi.shape
    if not (np.all(np.isfinite(trace.csi)) and np.all(np.isfinite(trace.timestamps))):
        raise TraceFormatError("trace contains non-finite values")
    flags = FLAG_TRUTH if trace.has_truth else 0
    parts = [
        _HEAD.pack(MAGIC, VERSION, flags, layout.n_fft, layout.delta_f_hz, trace.carrier_hz, K),
        np.asarray(layout.active, dtype="<u4").tobytes(),
        _TAIL.pack(A, T),
    ]
    rec = np.empty(T, dtype=_record_dtype(A, K))
    rec["t"] = trace.timestamps
    csi = np.moveaxis(trace.csi, 0, 1)
    rec["csi"][..., 0] = csi.real
    rec["csi"][..., 1] = csi.imag
    parts.append(rec.tobytes())
    if trace.has_truth:
        truth = np.empty(T, dtype=_truth_dtype(A))
        truth["rate"] = trace.true_rate_bpm
        truth["draws"] = np.moveaxis(trace.draws, 0, 1)
        parts.append(truth.tobytes())
    return b"".join(parts)


def decode_trace(buf):
    buf = memoryview(buf)
    if len(buf) < _HEAD.size:
        raise TraceFormatError("file too short for a trace header")
    magic, version, flags, n_fft, delta_f, carrier, K = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC:
        raise TraceFormatError(f"bad magic {bytes(magic)!r}")
    if version != VERSION:
        raise TraceFormatError(f"unsupported trace version {version}")
    off = _HEAD.size
    if len(buf) < off + 4 * K + _TAIL.size:
        raise TraceFormatError("truncated active-subcarrier list")
    active = np.frombuffer(buf, dtype="<u4", count=K, offset=off).astype(np.int64)
    off += 4 * K
    A, T = _TAIL.unpack_from(buf, off)
    off += _TAIL.size
    try:
        layout = SubcarrierLayout(n_fft, tuple(active), delta_f)
    except ValueError as exc:
        raise TraceFormatError(f"invalid layout: {exc}") from exc

    rdt = _record_dtype(A, K)
    size = T * rdt.itemsize
    has_truth = bool(flags & FLAG_TRUTH)
    expected = off + size + (T * _truth_dtype(A).itemsize if has_truth else 0)
    if len(buf) != expected:
        raise TraceFormatError(f"file is {len(buf)} bytes, header implies {expected}")
    rec = np.frombuffer(buf, dtype=rdt, count=T, offset=off)
    off += size
    csi = np.moveaxis(rec["csi"][..., 0] + 1j * rec["csi"][..., 1], 1, 0)
    rate = draws = None
    if has_truth:
        truth = np.frombuffer(buf, dtype=_truth_dtype(A), count=T, offset=off)
        rate = truth["rate"].copy()
        draws = np.moveaxis(truth["draws"], 1, 0).copy()
    if not (np.all(np.isfinite(rec["csi"])) and np.all(np.isfinite(rec["t"]))):
        raise TraceFormatError("trace contains non-finite values")
    return Trace(layout, carrier, rec["t"].copy(), np.ascontiguousarray(csi), rate, draws)


def write_trace(path, trace):
    Path(path).write_bytes(encode_trace(trace))


def read_trace(path):
    return decode_trace(Path(path).read_bytes())
