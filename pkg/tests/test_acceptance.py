"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -s`` (the lines
are printed even without ``-s``). The long campaigns take a few minutes on
one core.
"""

import math
import sys
import time

import numpy as np
import pytest

from jampack.container import (
    ConstraintSet,
    build_cube_constraints,
    build_polytope_constraints,
    hyperoctahedral_maps,
    make_container,
)
from jampack.envelope import g_value
from jampack.formats import catalog_document, dumps, load_fixture, record_document, trace_csv
from jampack.multistart import CampaignParams, catalog_insert, packing_fraction, run_campaign
from jampack.optimizer import LocalMaximumRecord, OptimizerParams, maximize
from jampack.polynomials import first_positive_root, load_reference_polynomials, polynomial_check
from jampack.verify import connelly_test, contact_graph, motion_constraints, refine_maximum, verify_maximum

TWO_DISK_R = (2 - math.sqrt(2)) / 2
THREE_DISK_R = (4 + math.sqrt(2) - math.sqrt(6)) / (2 * (3 + 2 * math.sqrt(2)))


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def polys():
    return load_reference_polynomials()


def timed_campaign(n, d, restarts, seed=0, container="cube"):
    cs = ConstraintSet(make_container(container, d), n)
    t = time.perf_counter()
    cat = run_campaign(cs, CampaignParams(restarts=restarts, seed=seed))
    return cs, cat, time.perf_counter() - t


@pytest.fixture(scope="module")
def five_disks():
    return timed_campaign(5, 2, 2000)


@pytest.fixture(scope="module")
def five_spheres():
    return timed_campaign(5, 3, 2000)


def test_criterion_01_three_disks(report):
    cs, cat, elapsed = timed_campaign(3, 2, 200)
    t = time.perf_counter()
    _, ref = refine_maximum(cs, cat.entries[-1].record.configuration)
    elapsed += time.perf_counter() - t
    gap = abs(ref.r - THREE_DISK_R)
    report(1, gap <= 1e-9 and elapsed <= 60,
           f"3 disks: refined max {ref.r!r}, gap {gap:.1e} (<= 1e-9), {elapsed:.1f} s (<= 60 s)")


def test_criterion_02_two_disks(report):
    cs = build_cube_constraints(2, 2)
    rng = np.random.default_rng(2)
    gaps = []
    for k in range(50):
        rec = maximize(cs, rng.uniform(size=(2, 2)), OptimizerParams(rng_seed=k), rng=rng)
        _, ref = refine_maximum(cs, rec.configuration)
        gaps.append(abs(ref.r - TWO_DISK_R) if ref.converged else math.inf)
    worst = max(gaps)
    report(2, worst <= 1e-10, f"2 disks: worst refined gap over 50 starts {worst:.1e} (<= 1e-10)")


def grid_entry(cs, cat):
    for e in reversed(cat.entries):
        if abs(e.radius - 0.25) < 1e-6:
            v = verify_maximum(cs, e.record.configuration)
            return v
    return None


def test_criterion_03_grid_packings(report):
    lines, ok = [], True
    for n, d, target in [(4, 2, math.pi / 4), (8, 3, math.pi / 6)]:
        cs, cat, elapsed = timed_campaign(n, d, 500)
        v = grid_entry(cs, cat)
        if v is None:
            ok = False
            lines.append(f"n={n} d={d}: no entry near 0.25")
            continue
        phi = packing_fraction(n, d, v.radius)
        good = abs(v.radius - 0.25) <= 1e-10 and abs(phi - target) <= 1e-9 and v.verdict.fully_jammed
        ok &= good
        lines.append(f"n={n} d={d}: r={v.radius!r} phi={phi:.10f} jammed={v.verdict.fully_jammed} ({elapsed:.0f} s)")
    report(3, ok, "grid packings: " + "; ".join(lines))


def jammed_radii(cs, cat, polys):
    out = []
    for e in cat.entries:
        v = verify_maximum(cs, e.record.configuration)
        if v.refinement.converged and v.verdict.fully_jammed:
            out.append(v.radius)
    distinct = []
    for r in sorted(out):
        if not distinct or r - distinct[-1] > 1e-6:
            distinct.append(r)
    return distinct


def test_criterion_04_five_disks(report, five_disks, polys):
    cs, cat, elapsed = five_disks
    radii = jammed_radii(cs, cat, polys)
    t15 = next(p for p in polys if p.label == "T_1^5" and p.d == 2)
    t35 = next(p for p in polys if p.label == "T_3^5" and p.d == 2)
    small = polynomial_check(radii[0], t15) if radii else None
    large = polynomial_check(radii[-1], t35) if radii else None
    ok = len(radii) >= 3 and small.matched and large.matched
    detail = (f"5 disks: {len(radii)} fully jammed radii {[round(r, 9) for r in radii]}; "
              f"smallest vs T_1^5 gap {small.abs_gap:.1e}, largest vs T_3^5 (sign-guarded) gap {large.abs_gap:.1e} "
              f"(<= 1e-8); {elapsed:.0f} s" if radii else "5 disks: no fully jammed maxima")
    report(4, ok, detail)


def test_criterion_05_five_spheres(report, five_spheres):
    cs, cat, elapsed = five_spheres
    t = time.perf_counter()
    best = max(refine_maximum(cs, e.record.configuration)[1].r for e in cat.entries[-5:])
    elapsed += time.perf_counter() - t
    root = first_positive_root((5, -20, 4))
    gap = abs(best - root)
    report(5, gap <= 1e-8 and elapsed <= 600,
           f"5 spheres: largest refined radius {best!r}, gap to root of 5-20t+4t^2 {gap:.1e} (<= 1e-8), "
           f"{elapsed:.0f} s (<= 600 s)")


def test_criterion_06_benchmark_fixtures(report, five_spheres):
    catalogs = {"five-spheres": five_spheres[1]}
    catalogs["seven-disks"] = timed_campaign(7, 2, 500)[1]
    catalogs["five-disks-triangle"] = timed_campaign(5, 2, 200, container="triangle2")[1]
    ok, lines = True, []
    for name in ("seven-disks", "five-spheres", "five-disks-triangle"):
        x0, kind = load_fixture(name)
        cs = ConstraintSet(make_container(kind, x0.shape[1]), x0.shape[0])
        runs = []
        for _ in range(2):
            rec = maximize(cs, x0, OptimizerParams(rng_seed=6))
            runs.append(trace_csv(rec.trace) + dumps(record_document(cs, rec)))
        steps = sum(t.event == "step" for t in rec.trace)
        gap = min(abs(e.radius - rec.radius) for e in catalogs[name].entries)
        good = rec.converged and steps <= 200 and runs[0] == runs[1] and gap <= 1e-6
        ok &= good
        lines.append(f"{name}: r={rec.radius:.9f} {rec.terminated_by} after {steps} steps, "
                     f"identical rerun={runs[0] == runs[1]}, catalog gap {gap:.1e}")
    report(6, ok, "fixtures: " + "; ".join(lines))


def test_criterion_07_gradients(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    h = 1e-6
    for k in range(100):
        n, d = int(rng.integers(2, 7)), int(rng.integers(2, 4))
        cs = build_cube_constraints(n, d)
        x = rng.uniform(size=n * d)
        J = cs.jacobian(np.arange(len(cs)), x)
        fd = np.empty_like(J)
        for c in range(n * d):
            e = np.zeros(n * d)
            e[c] = h
            fd[:, c] = (cs.values(x + e) - cs.values(x - e)) / (2 * h)
        rel = np.linalg.norm(J - fd, axis=1) / np.linalg.norm(J, axis=1)
        worst = max(worst, float(rel.max()))
    report(7, worst <= 1e-6, f"gradients: worst relative error vs central differences {worst:.1e} (<= 1e-6)")


def test_criterion_08_lipschitz(report):
    rng = np.random.default_rng(8)
    worst = -math.inf
    for _ in range(1000):
        n, d = int(rng.integers(2, 7)), int(rng.integers(2, 4))
        cs = build_cube_constraints(n, d)
        x, y = rng.uniform(-0.5, 1.5, size=(2, n, d))
        worst = max(worst, abs(g_value(cs, x) - g_value(cs, y)) - np.linalg.norm(x - y))
    report(8, worst <= 1e-12, f"Lipschitz: max of |G(x)-G(y)| - |x-y| over 1000 pairs {worst:.2e} (<= 1e-12)")


def lattice_max(m=201):
    """Exhaustive max of G for two disks over the m^4 lattice of the unit square."""
    t = np.linspace(0.0, 1.0, m)
    P = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)
    wall = np.minimum(P, 1.0 - P).min(axis=1)
    best = -math.inf
    for k in range(len(P)):
        half = 0.5 * np.sqrt(((P - P[k]) ** 2).sum(axis=1))
        best = max(best, float(np.minimum(np.minimum(half, wall), wall[k]).max()))
    return best


def test_criterion_09_brute_force(report):
    cs = build_cube_constraints(2, 2)
    rec = maximize(cs, np.array([[0.3, 0.4], [0.6, 0.7]]))
    _, ref = refine_maximum(cs, rec.configuration)
    oracle = lattice_max()
    ok = ref.r - oracle <= 0.005 and ref.r >= oracle - 1e-12
    report(9, ok, f"brute force: lattice max {oracle!r}, refined {ref.r!r}, difference {ref.r - oracle:.2e} "
                  "(in [0, 0.005])")


def steep_triangle_with_rattler(r=0.2, theta=math.radians(75)):
    a = r / math.tan(theta / 2)
    L = 2 * a + 2 * r
    s, c = math.sin(theta), math.cos(theta)
    container = make_container("polytope", 2, [[0, 1, 0], [s, -c, 0], [-s, -c, -L * s]])
    x = np.array([[a, r], [L - a, r], [L / 2, 3.2 * r]])
    return build_polytope_constraints(3, container), x


def witness_slack(cs, x, verdict):
    graph = contact_graph(cs, x, g_value(cs, x))
    w = verdict.witness
    cone = float(np.min(motion_constraints(cs, x, graph) @ w))
    g0 = g_value(cs, x)
    growth = min((g_value(cs, x + t * w.reshape(x.shape)) - g0) / t for t in (1e-5, 1e-7))
    return min(cone, growth)


def test_criterion_10_rigidity(report, five_disks):
    cs, x = steep_triangle_with_rattler()
    v = connelly_test(cs, x, contact_graph(cs, x, g_value(cs, x)))
    construct_ok = (not v.fully_jammed) and v.rattlers == (2,)
    slacks = [witness_slack(cs, x, v)]
    cs5, cat, _ = five_disks
    for e in cat.entries:
        ver = verify_maximum(cs5, e.record.configuration)
        if not ver.verdict.fully_jammed and ver.verdict.witness is not None:
            slacks.append(witness_slack(cs5, ver.refinement.x, ver.verdict))
    worst = min(slacks)
    report(10, construct_ok and worst >= -1e-8,
           f"rigidity: construction jammed={v.fully_jammed} rattlers={list(v.rattlers)} (expect [2]); "
           f"worst first-order slack over {len(slacks)} witnesses {worst:.1e} (>= -1e-8)")


def test_criterion_11_determinism_and_dedup(report, five_disks):
    cs, cat, _ = five_disks
    rng = np.random.default_rng(11)
    params = CampaignParams()
    maps = hyperoctahedral_maps(2)
    before = len(cat.entries)
    hits = [e.hits for e in cat.entries]
    for e in list(cat.entries):
        A, t = maps[int(rng.integers(len(maps)))]
        y = (e.record.configuration @ A.T + t)[rng.permutation(cs.n)]
        moved = LocalMaximumRecord(y, e.record.radius, e.record.active, [], e.record.terminated_by)
        catalog_insert(cat, moved, params)
    dedup_ok = len(cat.entries) == before
    for e, h in zip(cat.entries, hits):
        e.hits = h  # leave the shared catalog as it was

    cs4 = build_cube_constraints(4, 2)
    docs = []
    for workers in (1, 1, 2):
        p = CampaignParams(restarts=60, seed=5, workers=workers)
        docs.append(dumps(catalog_document(cs4, run_campaign(cs4, p), p)).replace('"workers"', ""))
    same = docs[0] == docs[1] == docs[2]
    report(11, dedup_ok and same,
           f"determinism: {before} entries before and {len(cat.entries)} after re-inserting symmetric images; "
           f"serial rerun and 2-worker catalogs byte-identical={same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
