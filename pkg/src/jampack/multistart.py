"""Multistart campaigns and the catalog of distinct local maxima.

Run ``k`` of a campaign draws its start point and its perturbation noise
from ``np.random.default_rng(np.random.SeedSequence([seed, k]))``, so runs
are independent of scheduling and a parallel campaign merges to the same
catalog as a serial one.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .container import Container, ConstraintSet
from .optimizer import LocalMaximumRecord, OptimizerParams, maximize


class SamplingFailure(RuntimeError):
    pass


class UnsupportedContainer(ValueError):
    pass


MAX_REJECTIONS = 10**6


@dataclass(frozen=True)
class CampaignParams:
    restarts: int = 10000
    optimizer: OptimizerParams = OptimizerParams()
    match_radius_tol: float = 1e-6
    # None means 1e-4 * sqrt(n d)
    match_distance_tol: float | None = None
    symmetry_group: str = "auto"
    seed: int = 0
    workers: int = 1
    bin_width: float = 1e-4

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.match_radius_tol <= 0 or (self.match_distance_tol is not None and self.match_distance_tol <= 0):
            raise ValueError("tolerances must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def distance_tol(self, n: int, d: int) -> float:
        if self.match_distance_tol is not None:
            return self.match_distance_tol
        return 1e-4 * math.sqrt(n * d)


def sample_start(n: int, d: int, container: Container, rng) -> np.ndarray:
    """Uniform start: the unit cube directly, other containers by rejection from the bounding box."""
    if container.kind == "cube":
        return rng.uniform(size=(n, d))
    lo, hi = container.bounds
    out = np.empty((n, d))
    filled = 0
    rejected = 0
    while filled < n:
        y = lo + (hi - lo) * rng.uniform(size=d)
        if container.contains(y)[0]:
            out[filled] = y
            filled += 1
        else:
            rejected += 1
            if rejected >= MAX_REJECTIONS:
                raise SamplingFailure("container occupies too little of its bounding box")
    return out


def run_rng(seed: int, k: int):
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def config_distance(a, b, maps) -> float:
    """Symmetry- and relabeling-invariant distance between two configurations.

    ``maps`` is a list of affine maps ``(A, t)`` (see
    ``Container.symmetries``). For each map the sphere matching is solved
    exactly as an assignment problem on squared distances.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("configurations differ in shape")
    best = math.inf
    for A, t in maps:
        ga = a @ A.T + t
        cost = ((ga[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        rows, cols = linear_sum_assignment(cost)
        best = min(best, float(cost[rows, cols].sum()))
    return math.sqrt(best)


@dataclass
class CatalogEntry:
    record: LocalMaximumRecord
    hits: int = 1
    packing_fraction: float | None = None
    annotations: dict = field(default_factory=dict)

    @property
    def radius(self) -> float:
        return self.record.radius


@dataclass
class Catalog:
    n: int
    d: int
    container: Container
    entries: list = field(default_factory=list)
    total_runs: int = 0
    failures: int = 0
    unconverged: int = 0
    radii: list = field(default_factory=list)

    @property
    def successful_runs(self) -> int:
        return sum(e.hits for e in self.entries)

    def find(self, rec, params: CampaignParams, maps):
        tol = params.distance_tol(self.n, self.d)
        for k, e in enumerate(self.entries):
            if abs(e.radius - rec.radius) <= params.match_radius_tol:
                if config_distance(rec.configuration, e.record.configuration, maps) <= tol:
                    return k
        return None


def catalog_insert(cat: Catalog, rec: LocalMaximumRecord, params: CampaignParams, maps=None) -> Catalog:
    """Count a hit on a matching entry or add a new one, keeping radius order."""
    if maps is None:
        maps = cat.container.symmetries(params.symmetry_group)
    k = cat.find(rec, params, maps)
    if k is not None:
        e = cat.entries[k]
        e.hits += 1
        if rec.radius > e.record.radius:
            e.record = rec
            e.packing_fraction = _fraction_or_none(cat, rec.radius)
        return cat
    entry = CatalogEntry(rec, 1, _fraction_or_none(cat, rec.radius))
    pos = 0
    while pos < len(cat.entries) and cat.entries[pos].radius <= rec.radius:
        pos += 1
    cat.entries.insert(pos, entry)
    return cat


def _fraction_or_none(cat, r):
    if cat.container.kind != "cube":
        return None
    return packing_fraction(cat.n, cat.d, max(r, 0.0))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def packing_fraction(n: int, d: int, r: float, container: Container | None = None) -> float:
    """Fraction ``n * omega_d * r^d`` of the unit cube covered by the spheres."""
    if container is not None and container.kind != "cube":
        raise UnsupportedContainer("packing fraction is defined for the unit cube only")
    if r < 0:
        raise ValueError("radius must be non-negative")
    return n * unit_ball_volume(d) * r**d


def max_maxima_bound(n: int, d: int) -> int:
    """``binomial(n(n-1)/2 + n d, n d + 1)``, an exact Python integer."""
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    return math.comb(n * (n - 1) // 2 + n * d, n * d + 1)


def histogram(radii, bin_width: float = 1e-4) -> list:
    """``(bin_left, frequency)`` pairs over the occupied bins; frequencies sum to 1."""
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        return []
    bins = np.floor(radii / bin_width).astype(np.int64)
    keys, counts = np.unique(bins, return_counts=True)
    total = counts.sum()
    return [(float(k * bin_width), float(c / total)) for k, c in zip(keys, counts)]


def _one_run(args):
    cs, params, k = args
    rng = run_rng(params.seed, k)
    x0 = sample_start(cs.n, cs.d, cs.container, rng)
    opt = replace(params.optimizer, rng_seed=params.seed)
    try:
        return k, maximize(cs, x0, opt, rng=rng)
    except Exception as exc:  # a failed run is counted, never fatal
        return k, exc


def run_campaign(cs: ConstraintSet, params: CampaignParams, progress=None) -> Catalog:
    """``params.restarts`` independent maximizations merged in run order.

    Only runs that terminate with a first-order certificate are inserted.
    Runs that raise count as ``failures``; runs that stop without a
    certificate count as ``unconverged``.
    """
    cat = Catalog(cs.n, cs.d, cs.container)
    maps = cs.container.symmetries(params.symmetry_group)
    jobs = [(cs, params, k) for k in range(params.restarts)]
    workers = min(params.workers, params.restarts)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = pool.map(_one_run, jobs, chunksize=max(1, params.restarts // (8 * workers)))
            _merge(cat, results, params, maps, progress)
    else:
        _merge(cat, map(_one_run, jobs), params, maps, progress)
    return cat


def _merge(cat, results, params, maps, progress):
    for k, rec in results:
        cat.total_runs += 1
        if isinstance(rec, Exception):
            cat.failures += 1
        elif not rec.converged:
            cat.unconverged += 1
        else:
            cat.radii.append(rec.radius)
            catalog_insert(cat, rec, params, maps)
        if progress is not None:
            progress(k, cat)
