#!/usr/bin/env python3
"""Recomputes summary statistics from the JSONL traces and checks them
against a summary CSV, independently of the C++ aggregation path.

    python3 scripts/check_aggregation.py results/summary.csv

Failed cases count at the full budget, matching the harness convention.
"""

import csv
import json
import math
import os
import sys


def recompute(trace_path, budget):
    totals = []
    failures = 0
    with open(trace_path) as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["success"]:
                totals.append(rec["total_queries"])
            else:
                failures += 1
                totals.append(budget)
    mean = sum(totals) / len(totals)
    var = sum((q - mean) ** 2 for q in totals) / len(totals)
    return failures, mean, math.sqrt(var)


def main(csv_path):
    base = os.path.dirname(os.path.abspath(csv_path))
    bad = 0
    with open(csv_path) as f:
        for row in csv.DictReader(f):
            stem = (f"traces_{row['problem']}_{row['algorithm']}"
                    f"_eps{row['epsilon']}_init{row['init_size']}.jsonl")
            trace_path = os.path.join(base, stem)
            with open(trace_path) as tf:
                budget = json.loads(tf.readline())["budget"]
            failures, mean, std = recompute(trace_path, budget)
            checks = [
                ("failure_times", failures, int(row["failure_times"])),
                ("query_mean", mean, float(row["query_mean"])),
                ("query_std", std, float(row["query_std"])),
            ]
            for name, got, want in checks:
                if abs(got - want) > 1e-9:
                    print(f"MISMATCH {stem} {name}: traces say {got}, csv says {want}")
                    bad += 1
    print("aggregation check:", "FAILED" if bad else "ok")
    return 1 if bad else 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
