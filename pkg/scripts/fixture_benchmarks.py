"""Maximize from the bundled benchmark starts and report iterations and radii.

Example::

    python3 scripts/fixture_benchmarks.py --trace-dir traces
"""

import argparse
import os
import time

from jampack.container import ConstraintSet, make_container
from jampack.formats import FIXTURES, load_fixture, trace_csv
from jampack.optimizer import OptimizerParams, maximize
from jampack.verify import refine_maximum


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", nargs="+", default=sorted(FIXTURES), choices=sorted(FIXTURES))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trace-dir", help="write <fixture>.trace.csv files here")
    args = ap.parse_args(argv)

    for name in args.fixture:
        x0, kind = load_fixture(name)
        cs = ConstraintSet(make_container(kind, x0.shape[1]), x0.shape[0])
        t = time.perf_counter()
        rec = maximize(cs, x0, OptimizerParams(rng_seed=args.seed))
        elapsed = time.perf_counter() - t
        steps = sum(row.event == "step" for row in rec.trace)
        _, ref = refine_maximum(cs, rec.configuration)
        print(f"{name:20s} r={rec.radius:.10f} refined={ref.r:.12f} {rec.terminated_by} "
              f"steps={steps} active={len(rec.active)} {elapsed:.2f} s")
        if args.trace_dir:
            os.makedirs(args.trace_dir, exist_ok=True)
            with open(os.path.join(args.trace_dir, f"{name}.trace.csv"), "w") as fh:
                fh.write(trace_csv(rec.trace))


if __name__ == "__main__":
    main()
