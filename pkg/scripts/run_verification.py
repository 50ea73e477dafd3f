#!/usr/bin/env python3
"""Run all brute-force verification suites and print their reports."""

import argparse
import sys

from fieldrecon.oracle import bandlimit_suite, grid_deviation_suite, ode_equivalence_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--trials", type=int, default=10_000)
    args = parser.parse_args()

    reports = [
        ode_equivalence_suite(),
        bandlimit_suite(seed=args.seed),
        grid_deviation_suite(seed=args.seed, trials=args.trials),
    ]
    ok = True
    for report in reports:
        print(f"[{'PASS' if report.passed else 'FAIL'}] suite {report.name}")
        for line in report.lines:
            print(f"  {line}")
        ok &= report.passed
    return 0 if ok else 4


if __name__ == "__main__":
    sys.exit(main())
