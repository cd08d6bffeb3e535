"""Command-line entry point: ``domino simulate | compensate | respire | bench``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unreadable trace, scheme the trace cannot feed, estimation failure),
3 benchmark acceptance failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .channel_model import frame_times, simulate_trace
from .config import RunConfig, load_config
from .errors import ConfigError, DominoError
from .pipeline import SCHEMES, respire, scheme_series
from .traceio import read_trace, write_trace

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ACCEPTANCE = 0, 1, 2, 3
COMPENSATE_HEADER = "time,channel,re,im,magnitude"
RESPIRE_HEADER = "scheme,bpm,confidence,channel,periodicity,true_bpm"

log = logging.getLogger("domino")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_simulate(args):
    cfg = _config(args)
    trace = simulate_trace(
        cfg.channel(), cfg.motion(), frame_times(cfg.duration_s, cfg.fs_hz),
        cfg.distortion_ranges(), cfg.seed, cfg.noise_std(),
        n_antennas=cfg.n_antennas, epsilon_mode=cfg.epsilon_mode,
    )
    write_trace(args.out, trace)
    log.info("wrote %d frames x %d antennas to %s", trace.n_frames, trace.n_antennas, args.out)
    return EXIT_OK


def compensated_table(trace, scheme, cfg, antenna=0):
    """Long-format rows ``(time, channel, re, im, magnitude)`` for a scheme's output."""
    out = scheme_series(trace, scheme, cfg, antenna)
    T, C = out.values.shape
    v = out.values.astype(np.complex128).ravel()
    return np.column_stack([
        np.repeat(trace.timestamps, C),
        np.tile(out.channels, T).astype(float),
        v.real, v.imag, np.abs(v),
    ])


def cmd_compensate(args):
    cfg = _config(args)
    trace = read_trace(args.trace)
    table = compensated_table(trace, args.scheme, cfg.pipeline(), args.antenna)
    np.savetxt(args.out, table, fmt=["%.17g", "%d", "%.17g", "%.17g", "%.17g"],
               delimiter=",", header=COMPENSATE_HEADER, comments="")
    return EXIT_OK


def cmd_respire(args):
    cfg = _config(args)
    trace = read_trace(args.trace)
    r = respire(trace, args.scheme, cfg.pipeline(), args.antenna)
    truth = float(trace.true_rate_bpm[0]) if trace.has_truth else float("nan")
    row = f"{r.scheme},{r.bpm:.10g},{r.confidence:.10g},{r.channel},{r.periodicity:.10g},{truth:.10g}"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(RESPIRE_HEADER + "\n" + row + "\n")
    print(f"{r.scheme}: {r.bpm:.3f} bpm (confidence {r.confidence:.1f}, channel {r.channel})")
    return EXIT_OK


def cmd_bench(args):
    cfg = _config(args)
    report = bench.run_bench(cfg)
    bench.write_report(report, args.out)
    sys.stdout.write(bench.summary_text(report))
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def build_parser():
    p = _Parser(prog="domino", description="RF distortion compensation for WiFi sensing.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write a synthetic breathing trace")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True, help="output .dcsi trace")
    s.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("compensate", cmd_compensate, "write the compensated series as CSV"),
        ("respire", cmd_respire, "estimate the breathing rate of a trace"),
    ):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("trace", help="input .dcsi trace")
        c.add_argument("--scheme", choices=SCHEMES, default="domino")
        c.add_argument("--antenna", type=int, default=0)
        c.add_argument("--config")
        c.add_argument("--out", required=name == "compensate")
        c.set_defaults(func=func)

    b = sub.add_parser("bench", help="compare schemes over a scenario grid")
    b.add_argument("--config")
    b.add_argument("--seed", type=int)
    b.add_argument("--out", required=True, help="report directory")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if getattr(args, "antenna", 0) < 0:
            raise _UsageError("--antenna must be non-negative")
        return args.func(args)
    except (ConfigError, _UsageError) as exc:
        print(f"domino: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DominoError, ValueError, OSError, IndexError) as exc:
        print(f"domino: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
