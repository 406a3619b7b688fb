#!/usr/bin/env python3
"""Run every experiment (E1-E7) and summarize the reports.

Usage: python3 scripts/run_all_experiments.py [--out DIR] [--only E3,E5]
Exit code 0 iff every check of every selected experiment passes.
"""

import argparse
import os
import sys

from elliptica import cli


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out", help="output root directory")
    ap.add_argument("--only", default=None,
                    help="comma-separated subset, e.g. E3,E5")
    args = ap.parse_args()

    ids = (args.only.split(",") if args.only else list(cli.EXPERIMENTS))
    ok = True
    for eid in ids:
        out = os.path.join(args.out, eid)
        report = cli.run(cli.ExperimentConfig(eid, {}, out))
        n_pass = sum(c["status"] == "pass" for c in report.checks)
        n_fail = sum(c["status"] == "fail" for c in report.checks)
        mark = "ok " if report.all_pass else "FAIL"
        print(f"[{mark}] {eid}: {n_pass} passed, {n_fail} failed, "
              f"{report.timing['seconds']}s -> {out}/report.json")
        for c in report.checks:
            if c["status"] == "fail":
                print(f"       failed check: {c['name']}")
        ok &= report.all_pass
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
