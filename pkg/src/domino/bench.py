"""Monte Carlo comparison of compensation schemes on synthetic breathing traces.

The grid is rates x SNRs x delay-shift ranges x seeds.  Each grid point
simulates one multi-antenna trace and feeds it to every scheme, so schemes
are compared on identical data.  Scenarios run on a thread pool capped by
the ``DOMINO_THREADS`` environment variable; results are collected in grid
order, so the output never depends on scheduling.
"""
from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel_model import frame_times, simulate_trace
from .errors import ConfigError
from .pipeline import respire
from .respiration import error_stats

ERRORS_HEADER = ("rate_bpm", "snr_db", "epsilon_max_taps", "seed", "scheme",
                 "estimate_bpm", "error_bpm", "confidence")
STATS_HEADER = ("scheme", "n", "median_bpm", "mean_bpm", "p80_bpm")
CDF_HEADER = ("scheme", "error_bpm", "fraction")


@dataclass(frozen=True)
class Scenario:
    rate_bpm: float
    snr_db: float
    epsilon_max_taps: float
    seed: int


@dataclass(frozen=True)
class Outcome:
    scenario: Scenario
    scheme: str
    estimate_bpm: float
    confidence: float

    @property
    def error_bpm(self):
        return abs(self.estimate_bpm - self.scenario.rate_bpm)


@dataclass(frozen=True)
class BenchReport:
    outcomes: tuple
    stats: dict
    checks: tuple

    @property
    def passed(self):
        return all(ok for _, ok in self.checks)

    def ranking(self):
        return sorted(self.stats, key=lambda s: self.stats[s].mean)


def thread_count(default=None):
    raw = os.environ.get("DOMINO_THREADS")
    if raw is None:
        return default or os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DOMINO_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"DOMINO_THREADS must be a positive integer, got {raw!r}")
    return n


def scenarios(cfg):
    grid = list(itertools.product(
        enumerate(cfg.bench_rates_bpm),
        enumerate(cfg.bench_snr_db),
        enumerate(cfg.bench_epsilon_max_taps),
        range(cfg.bench_seeds),
    ))
    if not grid or not cfg.bench_schemes:
        raise ConfigError("benchmark grid is empty: every bench_* list needs a value "
                          "and bench_seeds must be positive")
    out = []
    for (ri, rate), (si, snr), (ei, eps), s in grid:
        seed = int(np.random.SeedSequence([cfg.seed, ri, si, ei, s]).generate_state(1)[0])
        out.append(Scenario(rate, snr, eps, seed))
    return out


def run_scenario(cfg, sc):
    """Simulate one trace and estimate its rate with every configured scheme."""
    rng = np.random.default_rng(sc.seed)
    motion = replace(cfg.motion(sc.rate_bpm), phase_rad=float(rng.uniform(0, 2 * np.pi)))
    trace = simulate_trace(
        cfg.channel(), motion, frame_times(cfg.duration_s, cfg.fs_hz),
        cfg.distortion_ranges(sc.epsilon_max_taps), sc.seed, cfg.noise_std(sc.snr_db),
        n_antennas=cfg.n_antennas, epsilon_mode=cfg.epsilon_mode,
    )
    pcfg = cfg.pipeline()
    out = []
    for scheme in cfg.bench_schemes:
        r = respire(trace, scheme, pcfg)
        out.append(Outcome(sc, scheme, r.bpm, r.confidence))
    return out


def _acceptance(cfg, stats):
    checks = []
    if "domino" in stats:
        m = stats["domino"].mean
        checks.append((f"domino mean error {m:.4f} <= {cfg.accept_domino_mean_bpm:g} bpm",
                       m <= cfg.accept_domino_mean_bpm))
    if cfg.accept_ordering and len(stats) > 1:
        means = {s: st.mean for s, st in stats.items()}
        if "domino" in means:
            others = min(v for s, v in means.items() if s != "domino")
            checks.append((f"domino strictly best ({means['domino']:.4f} < {others:.4f})",
                           means["domino"] < others))
        if "raw" in means:
            others = max(v for s, v in means.items() if s != "raw")
            checks.append((f"raw strictly worst ({means['raw']:.4f} > {others:.4f})",
                           means["raw"] > others))
    return tuple(checks)


def run_bench(cfg, threads=None):
    if "csi-ratio" in cfg.bench_schemes and cfg.n_antennas < 2:
        raise ConfigError("csi-ratio in bench_schemes needs n_antennas >= 2")
    grid = scenarios(cfg)
    workers = min(threads or thread_count(), len(grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda sc: run_scenario(cfg, sc), grid))
    else:
        results = [run_scenario(cfg, sc) for sc in grid]
    outcomes = tuple(o for batch in results for o in batch)
    stats = {}
    for scheme in cfg.bench_schemes:
        sel = [o for o in outcomes if o.scheme == scheme]
        stats[scheme] = error_stats([o.estimate_bpm for o in sel],
                                    [o.scenario.rate_bpm for o in sel])
    return BenchReport(outcomes, stats, _acceptance(cfg, stats))


def _num(x):
    return format(float(x), ".10g")


def summary_text(report):
    lines = [f"{'rank':<5}{'scheme':<14}{'n':>5}{'median':>10}{'mean':>10}{'p80':>10}"]
    for i, scheme in enumerate(report.ranking(), start=1):
        st = report.stats[scheme]
        lines.append(f"{i:<5}{scheme:<14}{st.samples.size:>5}{st.median:>10.4f}"
                     f"{st.mean:>10.4f}{st.p80:>10.4f}")
    lines.append("")
    for text, ok in report.checks:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {text}")
    lines.append(f"acceptance: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_report(report, out_dir):
    """Write ``errors.csv``, ``stats.csv``, ``cdf.csv`` and ``summary.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "errors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERRORS_HEADER)
        for o in report.outcomes:
            sc = o.scenario
            w.writerow([_num(sc.rate_bpm), _num(sc.snr_db), _num(sc.epsilon_max_taps), sc.seed,
                        o.scheme, _num(o.estimate_bpm), _num(o.error_bpm), _num(o.confidence)])
    with open(out / "stats.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        for scheme, st in report.stats.items():
            w.writerow([scheme, st.samples.size, _num(st.median), _num(st.mean), _num(st.p80)])
    with open(out / "cdf.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CDF_HEADER)
        for scheme, st in report.stats.items():
            for err, frac in st.cdf():
                w.writerow([scheme, _num(err), _num(frac)])
    (out / "summary.txt").write_text(summary_text(report), encoding="utf-8")
