"""A small benchmark grid, written out the same way the CLI does it.

Pass a directory to keep the CSV files; otherwise they go to a temporary
directory that is listed and removed.
"""
import sys
import tempfile
from pathlib import Path

from domino.bench import run_bench, summary_text, write_report
from domino.config import parse_config

cfg = parse_config("""
bench_rates_bpm = 12, 18
bench_snr_db = 10
bench_seeds = 2
""")
report = run_bench(cfg)
print(summary_text(report))

with tempfile.TemporaryDirectory() as tmp:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tmp)
    write_report(report, out)
    for p in sorted(out.iterdir()):
        print(f"{p.name:<12} {p.stat().st_size:6d} bytes")
