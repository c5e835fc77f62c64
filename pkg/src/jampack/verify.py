"""Post-processing of local maxima: contact graphs, refinement, rigidity.

A maximum found by the optimizer is accurate to roughly the active-set
tolerance. Refinement solves the contact system

    |x_i - x_j|^2 - 4 r^2 = 0      for every touching pair
    a . x_i - b - r = 0            for every sphere-wall contact

by Gauss-Newton, which recovers the radius to machine precision when the
contact graph is right. Jamming is decided by a first-order (Connelly)
test: the packing is fully jammed iff the only motion ``x'`` that keeps
every contact from closing is ``x' = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .container import ConstraintSet, Pair, WallContact
from .envelope import g_value
from .polynomials import (  # noqa: F401  (re-exported)
    PolynomialMatch,
    ReferencePolynomial,
    load_reference_polynomials,
    match_radius,
    polynomial_check,
)
from .simplex import simplex_max

CONTACT_TOL = 1e-5
REFINE_TOL = 1e-12
JAMMED_TOL = 1e-9
FREE_TOL = 1e-6


class RefinementError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContactGraph:
    """Touching pairs ``(i, j)`` and sphere-wall incidences ``(i, wall)``, 0-based."""

    pairs: tuple
    walls: tuple
    tol: float

    def __len__(self):
        return len(self.pairs) + len(self.walls)

    def ids(self) -> list:
        return [Pair(*p) for p in self.pairs] + [WallContact(*w) for w in self.walls]

    def touched(self) -> set:
        return {i for p in self.pairs for i in p} | {w[0] for w in self.walls}

    def rattlers(self, n: int) -> list:
        """Spheres that appear in no contact."""
        t = self.touched()
        return [i for i in range(n) if i not in t]

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "walls": [list(w) for w in self.walls], "tol": self.tol}

    @classmethod
    def from_dict(cls, doc) -> "ContactGraph":
        return cls(tuple(tuple(p) for p in doc["pairs"]), tuple(tuple(w) for w in doc["walls"]), float(doc["tol"]))


def contact_graph(cs: ConstraintSet, x, r: float, tol: float = CONTACT_TOL) -> ContactGraph:
    """All functions whose value is within ``tol`` of ``r``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    vals = cs.values(x)
    hits = np.flatnonzero(np.abs(vals - r) <= tol)
    pairs, walls = [], []
    for k in hits:
        cid = cs.ids[k]
        if isinstance(cid, Pair):
            pairs.append((cid.i, cid.j))
        else:
            walls.append((cid.sphere, cid.wall))
    return ContactGraph(tuple(pairs), tuple(walls), float(tol))


@dataclass
class Refinement:
    x: np.ndarray
    r: float
    residual: float
    converged: bool
    singular: bool
    iterations: int
    frozen: list = field(default_factory=list)


def contact_residuals(cs: ConstraintSet, x, r, graph: ContactGraph) -> np.ndarray:
    x = cs.check(x)
    c = cs.container
    out = []
    for i, j in graph.pairs:
        diff = x[i] - x[j]
        out.append(diff @ diff - 4.0 * r * r)
    for i, w in graph.walls:
        out.append(c.normals[w] @ x[i] - c.offsets[w] - r)
    return np.array(out)


def _contact_jacobian(cs, x, r, graph, free):
    """Rows for the contact equations; columns are free-sphere coordinates, then r."""
    d = cs.d
    col = {s: k for k, s in enumerate(free)}
    J = np.zeros((len(graph), len(free) * d + 1))
    row = 0
    for i, j in graph.pairs:
        diff = 2.0 * (x[i] - x[j])
        J[row, col[i] * d:(col[i] + 1) * d] = diff
        J[row, col[j] * d:(col[j] + 1) * d] = -diff
        J[row, -1] = -8.0 * r
        row += 1
    for i, w in graph.walls:
        J[row, col[i] * d:(col[i] + 1) * d] = cs.container.normals[w]
        J[row, -1] = -1.0
        row += 1
    return J


def refine(cs: ConstraintSet, x, graph: ContactGraph, r0: float | None = None,
           tol: float = REFINE_TOL, max_iterations: int = 100) -> Refinement:
    """Gauss-Newton on the contact system in the unknowns ``(x, r)``.

    Spheres that appear in no contact keep their coordinates. Each step
    is a minimum-norm least-squares solve, so rank-deficient systems still
    converge to a nearby solution; they are reported with
    ``singular=True``.
    """
    if len(graph) == 0:
        raise ValueError("contact graph is empty")
    x = cs.check(x).copy()
    r = float(g_value(cs, x) if r0 is None else r0)
    frozen = graph.rattlers(cs.n)
    free = [i for i in range(cs.n) if i not in frozen]
    d = cs.d
    converged = False
    it = 0
    for it in range(max_iterations + 1):
        F = contact_residuals(cs, x, r, graph)
        if np.max(np.abs(F)) <= tol:
            converged = True
            break
        if it == max_iterations:
            break
        J = _contact_jacobian(cs, x, r, graph, free)
        step = scipy.linalg.lstsq(J, -F, lapack_driver="gelsy", check_finite=False)[0]
        x[free] += step[:-1].reshape(len(free), d)
        r += step[-1]
    J = _contact_jacobian(cs, x, r, graph, free)
    singular = np.linalg.matrix_rank(J) < J.shape[1]
    res = float(np.max(np.abs(contact_residuals(cs, x, r, graph))))
    return Refinement(x, float(r), res, converged, bool(singular), it, frozen)


def refine_maximum(cs: ConstraintSet, x, tols=(1e-5, 1e-6, 1e-7, 1e-8), consistency=1e-10):
    """Refine with the first contact tolerance that gives a consistent packing.

    A graph is accepted when refinement converges and the refined radius
    equals G at the refined configuration, i.e. no dropped contact is
    violated. Returns ``(graph, Refinement)``; if no tolerance works the
    last attempt is returned with ``converged=False``.
    """
    x = cs.check(x)
    r = g_value(cs, x)
    last = None
    for tol in tols:
        graph = contact_graph(cs, x, r, tol)
        if len(graph) == 0:
            continue
        ref = refine(cs, x, graph, r)
        if ref.converged and abs(g_value(cs, ref.x) - ref.r) <= consistency:
            return graph, ref
        last = (graph, ref)
    if last is None:
        raise RefinementError("no contacts at any tolerance")
    graph, ref = last
    ref.converged = False
    return graph, ref


@dataclass(frozen=True)
class RigidityVerdict:
    fully_jammed: bool
    rattlers: tuple = ()
    witness: np.ndarray | None = None
    max_motion: float = 0.0


def motion_constraints(cs: ConstraintSet, x, graph: ContactGraph) -> np.ndarray:
    """Rows ``g`` of the cone ``g . x' >= 0`` (unit contact normals)."""
    x = cs.check(x)
    d = cs.d
    G = np.zeros((len(graph), cs.n * d))
    row = 0
    for i, j in graph.pairs:
        u = x[i] - x[j]
        u = u / np.linalg.norm(u)
        G[row, i * d:(i + 1) * d] = u
        G[row, j * d:(j + 1) * d] = -u
        row += 1
    for i, w in graph.walls:
        G[row, i * d:(i + 1) * d] = cs.container.normals[w]
        row += 1
    return G


def connelly_test(cs: ConstraintSet, x, graph: ContactGraph) -> RigidityVerdict:
    """First-order jamming test by ``2 n d`` linear programs.

    Each LP maximizes ``+-x'_c`` over the motion cone intersected with the
    box ``[-1, 1]^{nd}``; the split ``x' = u - v`` with ``u, v`` in
    ``[0, 1]`` keeps every right-hand side at zero. Spheres whose block
    admits a motion larger than ``1e-6`` are reported as rattlers.
    """
    G = motion_constraints(cs, x, graph)
    nd = cs.n * cs.d
    A = np.hstack([-G, G]) if len(G) else np.zeros((0, 2 * nd))
    b = np.zeros(A.shape[0])
    per_coord = np.zeros(nd)
    witness, witness_val = None, 0.0
    for k in range(nd):
        for sign in (1.0, -1.0):
            c = np.zeros(2 * nd)
            c[k], c[nd + k] = sign, -sign
            z, val = simplex_max(c, A, b, upper=1.0)
            per_coord[k] = max(per_coord[k], val)
            motion = z[:nd] - z[nd:]
            if val > witness_val:
                witness, witness_val = motion, val
    block = per_coord.reshape(cs.n, cs.d).max(axis=1)
    rattlers = tuple(int(i) for i in np.flatnonzero(block > FREE_TOL))
    jammed = bool(np.all(per_coord <= JAMMED_TOL))
    if jammed or witness is None or np.linalg.norm(witness) <= FREE_TOL:
        witness = None
    return RigidityVerdict(jammed, () if jammed else rattlers, witness, float(per_coord.max()))


def _coef(v: float) -> str:
    return repr(float(v))


def emit_contact_system(cs: ConstraintSet, x, graph: ContactGraph) -> str:
    """Polynomial contact equations for a computer-algebra system.

    Variables are ``x<i>_<k>`` (1-based sphere and coordinate) and ``r``.
    The approximate solution is appended as comments for root selection.
    """
    if len(graph) == 0:
        raise ValueError("contact graph is empty")
    x = cs.check(x)
    d = cs.d
    c = cs.container
    lines = [f"(* contact system: n={cs.n} d={d} container={c.kind}, "
             f"{len(graph.pairs)} pair and {len(graph.walls)} wall equations *)"]
    for i, j in graph.pairs:
        terms = " + ".join(f"(x{i + 1}_{k + 1} - x{j + 1}_{k + 1})^2" for k in range(d))
        lines.append(f"{terms} - 4*r^2 == 0")
    for i, w in graph.walls:
        terms = []
        for k, a in enumerate(c.normals[w]):
            if a == 0.0:
                continue
            var = f"x{i + 1}_{k + 1}"
            if a == 1.0:
                terms.append(f"+ {var}")
            elif a == -1.0:
                terms.append(f"- {var}")
            else:
                terms.append(f"{'+' if a > 0 else '-'} {_coef(abs(a))}*{var}")
        b = -float(c.offsets[w])
        if b != 0.0:
            terms.insert(0, f"{'+' if b > 0 else '-'} {_coef(abs(b))}")
        expr = " ".join(terms)
        expr = expr[2:] if expr.startswith("+ ") else "-" + expr[2:]
        lines.append(f"{expr} - r == 0")
    approx = ", ".join(f"x{i + 1}_{k + 1} -> {_coef(x[i, k])}" for i in range(cs.n) for k in range(d))
    lines.append(f"(* approx: {approx}, r -> {_coef(g_value(cs, x))} *)")
    return "\n".join(lines) + "\n"


@dataclass
class Verification:
    graph: ContactGraph
    refinement: Refinement
    verdict: RigidityVerdict
    polynomial: str | None = None
    match: PolynomialMatch | None = None

    @property
    def radius(self) -> float:
        return self.refinement.r


def verify_maximum(cs: ConstraintSet, x, polys=None, match_tol: float = 1e-8) -> Verification:
    """Refine, test jamming and (optionally) match against reference polynomials."""
    graph, ref = refine_maximum(cs, x)
    # contacts of the refined packing, tight now that the radius is exact
    tight = contact_graph(cs, ref.x, ref.r, 1e-9) if ref.converged else graph
    verdict = connelly_test(cs, ref.x, tight if len(tight) else graph)
    label, match = None, None
    if polys is not None and ref.r > 0:
        label, match = match_radius(ref.r, polys, cs.n, cs.d, match_tol)
    return Verification(tight if len(tight) else graph, ref, verdict, label, match)
