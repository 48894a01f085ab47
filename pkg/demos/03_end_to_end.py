"""Run the whole pipeline on a small demo cohort and print the headline table.

Equivalent to ``mwlindex run-all --demo`` with a reduced configuration; this
takes about half a minute.

    python demos/03_end_to_end.py [out_dir]
"""

import csv
import sys

from mwlindex.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "demo_out"
small = ["--set", "demo.n_subjects=16", "--set", "demo.rating_mode=subject",
         "--set", "synth.n_subjects=40", "--set", "select.search_iterations=5", "--iterations", "20"]
code = main(["run-all", "--demo", "--out", out, *small])
if code != 0:
    sys.exit(code)

with open(f"{out}/report/performance.csv") as fh:
    rows = [r for r in csv.DictReader(fh) if r["metric"] == "accuracy"]
print(f"{'index':10s} {'L-R':>7s} {'SVM':>7s} {'DTR':>7s}   (original dataset, mean accuracy)")
for r in rows:
    print(f"{r['index']:10s} " + " ".join(f"{float(r[f'{k}_original_mean']):7.3f}" for k in ("L-R", "SVM", "DTR")))
