"""Hit frequency of each local maximum in a campaign, with the radius histogram.

Example::

    python3 scripts/basin_frequencies.py --n 5 --d 2 --restarts 10000 --histogram hist.csv
"""

import argparse
import os

from jampack.container import ConstraintSet, make_container
from jampack.formats import histogram_csv
from jampack.multistart import CampaignParams, run_campaign
from jampack.polynomials import load_reference_polynomials, match_radius


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--container", default="cube", choices=["cube", "triangle2"])
    ap.add_argument("--restarts", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--histogram", help="radius histogram CSV path")
    args = ap.parse_args(argv)

    cs = ConstraintSet(make_container(args.container, args.d), args.n)
    params = CampaignParams(restarts=args.restarts, seed=args.seed, workers=args.workers)
    cat = run_campaign(cs, params)
    polys = load_reference_polynomials()
    print(f"{cat.total_runs} runs, {cat.successful_runs} converged, {cat.failures} failures, "
          f"{cat.unconverged} unconverged")
    for e in reversed(cat.entries):
        label, _ = match_radius(e.radius, polys, args.n, args.d, tol=1e-6)
        share = e.hits / max(cat.total_runs, 1)
        print(f"  r={e.radius:.10f} hits={e.hits:6d} ({100 * share:.2f}%) {label or ''}")
    if args.histogram:
        with open(args.histogram, "w") as fh:
            fh.write(histogram_csv(cat.radii, params.bin_width))


if __name__ == "__main__":
    main()
