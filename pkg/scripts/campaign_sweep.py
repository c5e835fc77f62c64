"""Run multistart campaigns over a grid of (n, d) and summarize the catalogs.

Example::

    python3 scripts/campaign_sweep.py --n 3 4 5 --d 2 --restarts 500 --out sweep.json
"""

import argparse
import json
import os
import time

from jampack.container import ConstraintSet, make_container
from jampack.formats import catalog_document, dumps
from jampack.multistart import CampaignParams, run_campaign
from jampack.polynomials import load_reference_polynomials
from jampack.verify import RefinementError, verify_maximum


def summarize(cs, cat, polys, verify=True):
    rows = []
    for e in reversed(cat.entries):
        row = {"radius": e.radius, "hits": e.hits, "packing_fraction": e.packing_fraction}
        if verify:
            try:
                v = verify_maximum(cs, e.record.configuration, polys)
                row.update(refined=v.radius, jammed=v.verdict.fully_jammed,
                           rattlers=list(v.verdict.rattlers), match=v.polynomial)
            except (RefinementError, ValueError, ArithmeticError) as exc:
                row["verify_error"] = str(exc)
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--d", type=int, nargs="+", default=[2])
    ap.add_argument("--container", default="cube", choices=["cube", "triangle2"])
    ap.add_argument("--restarts", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--no-verify", action="store_true", help="skip refinement and the rigidity test")
    ap.add_argument("--catalog-dir", help="also write each catalog JSON here")
    ap.add_argument("--out", help="summary JSON path (default: stdout only)")
    args = ap.parse_args(argv)

    polys = load_reference_polynomials()
    report = []
    for d in args.d:
        for n in args.n:
            cs = ConstraintSet(make_container(args.container, d), n)
            params = CampaignParams(restarts=args.restarts, seed=args.seed, workers=args.workers)
            t = time.perf_counter()
            cat = run_campaign(cs, params)
            elapsed = time.perf_counter() - t
            rows = summarize(cs, cat, polys, not args.no_verify)
            print(f"n={n} d={d}: {len(cat.entries)} maxima, {cat.failures} failures, "
                  f"{cat.unconverged} unconverged, best r={cat.entries[-1].radius:.10f}, {elapsed:.1f} s"
                  if cat.entries else f"n={n} d={d}: no converged runs")
            for row in rows[:5]:
                print(f"    r={row['radius']:.10f} hits={row['hits']} jammed={row.get('jammed')} "
                      f"match={row.get('match')}")
            if args.catalog_dir:
                os.makedirs(args.catalog_dir, exist_ok=True)
                path = os.path.join(args.catalog_dir, f"catalog_{args.container}_n{n}_d{d}.json")
                with open(path, "w") as fh:
                    fh.write(dumps(catalog_document(cs, cat, params)))
            report.append({"n": n, "d": d, "seconds": elapsed, "total_runs": cat.total_runs,
                           "failures": cat.failures, "unconverged": cat.unconverged, "entries": rows})
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=1)


if __name__ == "__main__":
    main()
