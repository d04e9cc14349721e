"""Sweep the condition cap and report how tight each lower bound is on average.

For every cap the suite is rerun on a small sample; the CSV column
meanTightness is the mean of lambda_max(lhs^-1/2 rhs lhs^-1/2) over reverse checks.
"""

import argparse

from spdmeans.verify import TrialSpec, run_suite


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--caps", default="1.5,3,10,30,100")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--theorems", default="T1,T_GeoHalf,T3,T4,T5")
    args = p.parse_args(argv)

    theorems = tuple(args.theorems.split(","))
    print("cap," + ",".join(theorems))
    for cap in (float(c) for c in args.caps.split(",")):
        spec = TrialSpec(dims=(args.dim,), count=args.count, cond_cap=cap, theorems=theorems,
                         n_grid=(3,))
        res = run_suite(spec, workers=1)
        row = {r["theorem"]: r["meanTightness"] for r in res.summary}
        print(f"{cap:g}," + ",".join(f"{row[t]:.4f}" for t in theorems))


if __name__ == "__main__":
    main()
