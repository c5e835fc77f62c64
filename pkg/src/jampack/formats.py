"""Plain-text formats: configurations, wall files, JSON documents and CSV tables."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from importlib import resources

import numpy as np

from . import __version__
from .container import Container, make_container
from .multistart import CampaignParams, Catalog, histogram
from .optimizer import OptimizerParams
from .verify import contact_graph


class InputError(ValueError):
    """Malformed input document (CLI exit code 2)."""


FIXTURES = {
    "seven-disks": ("seven_disks_square.txt", "cube"),
    "five-spheres": ("five_spheres_cube.txt", "cube"),
    "five-disks-triangle": ("five_disks_triangle.txt", "triangle2"),
}


# configurations ---------------------------------------------------------

def format_configuration(x) -> str:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, d = x.shape
    lines = [f"{n} {d}"]
    lines += [" ".join("%.17g" % v for v in row) for row in x]
    return "\n".join(lines) + "\n"


def parse_configuration(text: str, n=None, d=None) -> np.ndarray:
    """Header ``n d`` followed by one line of ``d`` numbers per sphere."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InputError("empty configuration")
    try:
        hn, hd = (int(v) for v in rows[0])
    except ValueError as exc:
        raise InputError(f"bad header {' '.join(rows[0])!r}, expected 'n d'") from exc
    if (n is not None and n != hn) or (d is not None and d != hd):
        raise InputError(f"configuration is for n={hn} d={hd}, expected n={n} d={d}")
    body = rows[1:]
    if len(body) != hn or any(len(r) != hd for r in body):
        raise InputError(f"expected {hn} lines of {hd} coordinates")
    try:
        x = np.array([[float(v) for v in r] for r in body])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise InputError("non-finite coordinate")
    return x


def read_configuration(path, n=None, d=None) -> np.ndarray:
    with open(path) as fh:
        return parse_configuration(fh.read(), n, d)


def load_fixture(name: str):
    """``(x, container kind)`` for one of the bundled benchmark starts."""
    if name not in FIXTURES:
        raise InputError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    fname, kind = FIXTURES[name]
    text = resources.files("jampack.data.fixtures").joinpath(fname).read_text()
    return parse_configuration(text), kind


def parse_walls(text: str) -> np.ndarray:
    """One wall per line: ``a_1 ... a_d b`` for the half-space ``a . y >= b``."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        walls = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if walls.ndim != 2 or walls.shape[0] == 0 or len({len(r) for r in rows}) != 1:
        raise InputError("wall file needs rows of equal length")
    return walls


# run configuration ------------------------------------------------------

CAMPAIGN_KEYS = {"restarts", "match_radius_tol", "match_distance_tol", "symmetry_group", "bin_width"}
OPTIMIZER_KEYS = {f.name for f in dataclasses.fields(OptimizerParams)}
RUN_KEYS = {"container", "n", "seed", "workers", "optimizer", "campaign", "x0", "output", "epsilon"}
CONTAINER_KEYS = {"kind", "d", "walls"}
OUTPUT_KEYS = {"out", "trace", "histogram"}


@dataclasses.dataclass
class RunConfig:
    """Settings shared by the subcommands; JSON keys mirror the field names.

    ``container`` is ``{"kind": "cube" | "triangle2" | "polytope", "d": int,
    "walls": [[a_1, ..., a_d, b], ...]}``. ``optimizer`` and ``campaign``
    hold ``OptimizerParams`` and ``CampaignParams`` fields.
    """

    container: dict = dataclasses.field(default_factory=lambda: {"kind": "cube", "d": 2})
    n: int | None = None
    seed: int = 0
    workers: int = 1
    optimizer: dict = dataclasses.field(default_factory=dict)
    campaign: dict = dataclasses.field(default_factory=dict)
    x0: list | None = None
    output: dict = dataclasses.field(default_factory=dict)
    epsilon: float = 1e-9

    def make_container(self) -> Container:
        c = self.container
        return make_container(c.get("kind", "cube"), int(c.get("d", 2)), c.get("walls"))

    def optimizer_params(self) -> OptimizerParams:
        return OptimizerParams(**{**self.optimizer, "rng_seed": self.optimizer.get("rng_seed", self.seed)})

    def campaign_params(self) -> CampaignParams:
        return CampaignParams(optimizer=self.optimizer_params(), seed=self.seed, workers=self.workers,
                              **self.campaign)


def _reject_unknown(doc, allowed, where):
    if not isinstance(doc, dict):
        raise InputError(f"{where} must be a JSON object")
    extra = sorted(set(doc) - allowed)
    if extra:
        raise InputError(f"unknown keys in {where}: {', '.join(extra)}")


def parse_run_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"run config is not valid JSON: {exc}") from exc
    _reject_unknown(doc, RUN_KEYS, "run config")
    _reject_unknown(doc.get("container", {}), CONTAINER_KEYS, "container")
    _reject_unknown(doc.get("optimizer", {}), OPTIMIZER_KEYS, "optimizer")
    _reject_unknown(doc.get("campaign", {}), CAMPAIGN_KEYS, "campaign")
    _reject_unknown(doc.get("output", {}), OUTPUT_KEYS, "output")
    cfg = RunConfig(**doc)
    cfg.container = {"kind": "cube", "d": 2, **cfg.container}
    return cfg


def read_run_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_run_config(fh.read())


# documents --------------------------------------------------------------

def dumps(doc) -> str:
    """Canonical JSON text; floats use the shortest repr that round-trips."""
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from exc


def read_document(path):
    with open(path) as fh:
        return loads(fh.read())


def write_text(path, text: str):
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def record_document(cs, rec) -> dict:
    return {
        "n": cs.n,
        "d": cs.d,
        "container": cs.container.describe(),
        "radius": float(rec.radius),
        "coordinates": rec.configuration.tolist(),
        "active": [str(cs.ids[k]) for k in rec.active.labels],
        "terminated_by": rec.terminated_by,
        "iterations": len([t for t in rec.trace if t.event == "step"]),
    }


def catalog_document(cs, cat: Catalog, params: CampaignParams) -> dict:
    entries = []
    for e in cat.entries:
        rec = e.record
        graph = contact_graph(cs, rec.configuration, rec.radius)
        entries.append({
            "radius": float(rec.radius),
            "packing_fraction": e.packing_fraction,
            "coordinates": rec.configuration.tolist(),
            "active_count": len(rec.active),
            "contact_graph": graph.to_dict(),
            "fully_jammed": None,
            "rattlers": None,
            "hit_count": e.hits,
        })
    return {
        "metadata": {
            "n": cs.n,
            "d": cs.d,
            "container": cs.container.describe(),
            "seed": params.seed,
            "restarts": params.restarts,
            "total_runs": cat.total_runs,
            "failures": cat.failures,
            "unconverged": cat.unconverged,
            "tool": "jampack",
            "version": __version__,
        },
        "entries": entries,
    }


def container_from_metadata(meta) -> Container:
    c = meta["container"]
    return make_container(c["kind"], int(c["d"]), c.get("walls"))


# CSV ------------------------------------------------------------------------

TRACE_COLUMNS = ("iter", "g_value", "active_count", "residual_sq", "step", "event")


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t in trace:
        w.writerow([t.iteration, repr(float(t.g_value)), t.active_count, repr(float(t.residual_sq)),
                    repr(float(t.step)), t.event])
    return buf.getvalue()


def histogram_csv(radii, bin_width: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("radius_bin", "frequency"))
    for left, freq in histogram(radii, bin_width):
        w.writerow((repr(round(left, 12)), repr(freq)))
    return buf.getvalue()
