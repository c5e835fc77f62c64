"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .container import ConstraintSet, InvalidContainer
from .envelope import active_set, g_value
from .formats import (
    FIXTURES,
    InputError,
    RunConfig,
    catalog_document,
    container_from_metadata,
    dumps,
    histogram_csv,
    load_fixture,
    loads,
    parse_configuration,
    parse_walls,
    read_run_config,
    record_document,
    trace_csv,
    write_text,
)
from .multistart import run_campaign, sample_start
from .optimizer import maximize
from .polynomials import load_reference_polynomials
from .render import render_dot, render_svg
from .verify import ContactGraph, contact_graph, emit_contact_system, verify_maximum

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


class NumericalError(RuntimeError):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="JSON run configuration; flags override its values")
    g.add_argument("--seed", type=int, help="master seed (default 0)")
    g.add_argument("--container", choices=["cube", "triangle2", "polytope"], help="container kind (default cube)")
    g.add_argument("--walls", help="wall file for --container polytope: one 'a_1 ... a_d b' per line")
    g.add_argument("--n", type=int, help="number of spheres")
    g.add_argument("--d", type=int, help="dimension (default 2)")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--workers", type=int,
                   help="worker processes for campaigns (default: available CPUs); output does not depend on it")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="jampack", description="Jammed sphere packings by nonsmooth ascent.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], formatter_class=fmt,
                       help="print G(x) and the active constraints")
    p.add_argument("configuration", nargs="?", help="configuration file ('n d' header, one sphere per line)")
    p.add_argument("--coords", type=float, nargs="+", help="inline coordinates x_11 x_12 ... (needs --n)")
    p.add_argument("--epsilon", type=float, default=1e-9, help="active-set tolerance")

    p = sub.add_parser("maximize", parents=[common], formatter_class=fmt,
                       help="one local maximization; writes the record and its trace")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--x0", help="start configuration file")
    src.add_argument("--fixture", choices=sorted(FIXTURES), help="bundled benchmark start")
    p.add_argument("--trace", help="trace CSV path (default: <out>.trace.csv when --out is given)")

    p = sub.add_parser("campaign", parents=[common], formatter_class=fmt,
                       help="multistart campaign; writes the catalog and a radius histogram")
    p.add_argument("--restarts", type=int, help="number of runs (default 10000)")
    p.add_argument("--bin-width", type=float, help="histogram bin width (default 1e-4)")
    p.add_argument("--histogram", help="histogram CSV path (default: <out>.hist.csv when --out is given)")

    p = sub.add_parser("verify", parents=[common], formatter_class=fmt,
                       help="refine, test jamming and match reference polynomials for every catalog entry")
    p.add_argument("catalog")
    p.add_argument("--match-tol", type=float, default=1e-8, help="polynomial root tolerance")

    p = sub.add_parser("render", parents=[common], formatter_class=fmt,
                       help="SVG (d = 2) or DOT (d >= 3) drawing of one catalog entry")
    p.add_argument("catalog")
    p.add_argument("--entry", type=int, default=-1, help="entry index; negative counts from the end")

    p = sub.add_parser("emit-system", parents=[common], formatter_class=fmt,
                       help="contact equations of a catalog entry or configuration for a CAS")
    p.add_argument("source", help="catalog JSON or configuration file")
    p.add_argument("--entry", type=int, default=-1, help="entry index for a catalog")
    p.add_argument("--tol", type=float, default=1e-5, help="contact tolerance for configurations")
    return parser


def _settings(args) -> RunConfig:
    cfg = read_run_config(args.config) if args.config else RunConfig()
    container = dict(cfg.container)
    if args.container:
        container["kind"] = args.container
    if args.d:
        container["d"] = args.d
    if args.walls:
        with open(args.walls) as fh:
            walls = parse_walls(fh.read())
        container["walls"] = walls.tolist()
        container["d"] = walls.shape[1] - 1
    if container.get("kind") == "triangle2":
        container["d"] = 2
    cfg.container = container
    if args.seed is not None:
        cfg.seed = args.seed
    if args.n is not None:
        cfg.n = args.n
    if args.workers is not None:
        cfg.workers = args.workers
    elif not args.config:
        cfg.workers = os.cpu_count() or 1
    if args.out:
        cfg.output = {**cfg.output, "out": args.out}
    return cfg


def _derived(out, suffix):
    if not out or out == "-":
        return None
    root, _ = os.path.splitext(out)
    return root + suffix


def _constraints(cfg: RunConfig, n: int) -> ConstraintSet:
    return ConstraintSet(cfg.make_container(), n)


def cmd_evaluate(args, cfg: RunConfig) -> int:
    if args.configuration:
        with open(args.configuration) as fh:
            x = parse_configuration(fh.read(), cfg.n, args.d)
    elif args.coords:
        if cfg.n is None:
            raise InputError("--coords needs --n")
        d = int(cfg.container.get("d", 2))
        if len(args.coords) != cfg.n * d:
            raise InputError(f"got {len(args.coords)} coordinates, expected n*d = {cfg.n * d}")
        x = np.array(args.coords).reshape(cfg.n, d)
    elif cfg.x0 is not None:
        x = np.asarray(cfg.x0, dtype=float)
    else:
        raise InputError("give a configuration file or --coords")
    if cfg.container.get("kind") != "polytope":
        cfg.container["d"] = x.shape[1]
    cs = _constraints(cfg, x.shape[0])
    if cs.d != x.shape[1]:
        raise InputError(f"configuration is {x.shape[1]}-dimensional, container is {cs.d}-dimensional")
    g = g_value(cs, x)
    act = active_set(cs, x, args.epsilon)
    lines = [f"G {g!r}", f"active {len(act)} (epsilon {args.epsilon!r})"]
    lines += [f"  {cid}" for cid in act.ids(cs)]
    write_text(cfg.output.get("out"), "\n".join(lines) + "\n")
    if g < 0:
        print("warning: configuration is infeasible (G < 0)", file=sys.stderr)
    return EXIT_OK


def cmd_maximize(args, cfg: RunConfig) -> int:
    if args.fixture:
        x0, kind = load_fixture(args.fixture)
        if args.container is None:
            cfg.container = {"kind": kind, "d": x0.shape[1]}
    elif args.x0:
        with open(args.x0) as fh:
            x0 = parse_configuration(fh.read(), cfg.n)
    elif cfg.x0 is not None:
        x0 = np.asarray(cfg.x0, dtype=float)
    else:
        x0 = None
    if x0 is not None:
        if cfg.container.get("kind") != "polytope":
            cfg.container["d"] = x0.shape[1]
        n = x0.shape[0]
    else:
        if cfg.n is None:
            raise InputError("give --n, --x0 or --fixture")
        n = cfg.n
    cs = _constraints(cfg, n)
    params = cfg.optimizer_params()
    rng = np.random.default_rng(params.rng_seed)
    if x0 is None:
        x0 = sample_start(cs.n, cs.d, cs.container, rng)
    if x0.shape != (cs.n, cs.d):
        raise InputError(f"start has shape {x0.shape}, expected {(cs.n, cs.d)}")
    trace_path = args.trace or cfg.output.get("trace") or _derived(cfg.output.get("out"), ".trace.csv")
    rec = maximize(cs, x0, params, rng=rng)
    if trace_path:
        write_text(trace_path, trace_csv(rec.trace))
    write_text(cfg.output.get("out"), dumps(record_document(cs, rec)))
    print(f"radius {rec.radius!r} terminated_by {rec.terminated_by}", file=sys.stderr)
    if rec.terminated_by == "perturb-exhausted":
        raise NumericalError("optimizer gave up after repeated perturbation failures")
    return EXIT_OK


def cmd_campaign(args, cfg: RunConfig) -> int:
    if cfg.n is None:
        raise InputError("campaign needs --n")
    if args.restarts is not None:
        cfg.campaign = {**cfg.campaign, "restarts": args.restarts}
    if args.bin_width is not None:
        cfg.campaign = {**cfg.campaign, "bin_width": args.bin_width}
    cs = _constraints(cfg, cfg.n)
    params = cfg.campaign_params()
    cat = run_campaign(cs, params)
    out = cfg.output.get("out")
    hist_path = args.histogram or cfg.output.get("histogram") or _derived(out, ".hist.csv")
    if hist_path:
        write_text(hist_path, histogram_csv(cat.radii, params.bin_width))
    write_text(out, dumps(catalog_document(cs, cat, params)))
    print(f"{len(cat.entries)} entries from {cat.total_runs} runs "
          f"({cat.failures} failed, {cat.unconverged} unconverged)", file=sys.stderr)
    return EXIT_OK


def _read_catalog(path):
    with open(path) as fh:
        doc = loads(fh.read())
    if not isinstance(doc, dict) or "metadata" not in doc or "entries" not in doc:
        raise InputError(f"{path} is not a catalog document")
    meta = doc["metadata"]
    try:
        cs = ConstraintSet(container_from_metadata(meta), int(meta["n"]))
    except (KeyError, TypeError, InvalidContainer) as exc:
        raise InputError(f"bad catalog metadata: {exc}") from exc
    return doc, cs


def _entry(doc, k):
    entries = doc["entries"]
    if not -len(entries) <= k < len(entries):
        raise InputError(f"entry {k} out of range (catalog has {len(entries)})")
    return entries[k]


def cmd_verify(args, cfg: RunConfig) -> int:
    doc, cs = _read_catalog(args.catalog)
    polys = load_reference_polynomials()
    for e in doc["entries"]:
        try:
            v = verify_maximum(cs, np.asarray(e["coordinates"]), polys, args.match_tol)
        except Exception as exc:  # recorded per entry, never fatal
            e["verify_error"] = f"{type(exc).__name__}: {exc}"
            continue
        e.pop("verify_error", None)
        e["refined_radius"] = v.radius
        e["refined_coordinates"] = v.refinement.x.tolist()
        e["refinement"] = {"converged": v.refinement.converged, "singular": v.refinement.singular,
                           "residual": v.refinement.residual, "contact_tol": v.graph.tol}
        e["contact_graph"] = v.graph.to_dict()
        e["fully_jammed"] = v.verdict.fully_jammed
        e["rattlers"] = list(v.verdict.rattlers)
        e["polynomial_match"] = v.polynomial or "none"
    write_text(cfg.output.get("out"), dumps(doc))
    return EXIT_OK


def _entry_geometry(e):
    x = np.asarray(e.get("refined_coordinates", e["coordinates"]), dtype=float)
    r = float(e.get("refined_radius", e["radius"]))
    return x, r


def cmd_render(args, cfg: RunConfig) -> int:
    doc, cs = _read_catalog(args.catalog)
    e = _entry(doc, args.entry)
    x, r = _entry_geometry(e)
    graph = ContactGraph.from_dict(e["contact_graph"]) if e.get("contact_graph") else contact_graph(cs, x, r)
    if cs.d == 2:
        text = render_svg(cs.container, x, r, graph)
    else:
        text = render_dot(cs.n, graph)
    write_text(cfg.output.get("out"), text)
    return EXIT_OK


def cmd_emit_system(args, cfg: RunConfig) -> int:
    with open(args.source) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc, cs = _read_catalog(args.source)
        e = _entry(doc, args.entry)
        x, r = _entry_geometry(e)
        graph = ContactGraph.from_dict(e["contact_graph"]) if e.get("contact_graph") else contact_graph(cs, x, r)
    else:
        x = parse_configuration(text, cfg.n)
        if cfg.container.get("kind") != "polytope":
            cfg.container["d"] = x.shape[1]
        cs = _constraints(cfg, x.shape[0])
        graph = contact_graph(cs, x, g_value(cs, x), args.tol)
    if len(graph) == 0:
        raise InputError("no contacts to emit")
    write_text(cfg.output.get("out"), emit_contact_system(cs, x, graph))
    return EXIT_OK


COMMANDS = {
    "evaluate": cmd_evaluate,
    "maximize": cmd_maximize,
    "campaign": cmd_campaign,
    "verify": cmd_verify,
    "render": cmd_render,
    "emit-system": cmd_emit_system,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](args, cfg)
    except (InputError, InvalidContainer, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
