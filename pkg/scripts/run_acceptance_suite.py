"""Run the full seeded inequality suite and write reports.

Usage: python3 scripts/run_acceptance_suite.py [--out-dir reports] [--seed 0] [--workers N]
"""

import argparse
import logging
import sys
import time
from collections import Counter

from spdmeans.verify import TrialSpec, run_suite


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--workers", type=int)
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    spec = TrialSpec(dims=(2, 3, 5, 8), count=args.count, master_seed=args.seed)
    start = time.perf_counter()
    result = run_suite(spec, workers=args.workers)
    elapsed = time.perf_counter() - start
    result.write(args.out_dir)
    sys.stdout.write(result.csv())

    fails = Counter()
    for rec in result.records:
        for c in rec.get("checks", []):
            if not c["pass"]:
                fails[(rec["theorem"], c["tag"], rec["params"].get("f"))] += 1
    for (theorem, tag, f), n in sorted(fails.items(), key=str):
        print(f"# failing: {theorem} {tag}{' ' + f if f else ''}: {n} records")
    print(f"# {len(result.records)} records in {elapsed:.1f} s")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
