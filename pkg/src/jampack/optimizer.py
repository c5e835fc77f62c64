"""Local maximization of the maximal radius function.

Each iteration takes the epsilon-active functions at the current point,
solves ``min |J xi - 1|^2`` so that all of them grow at the same rate, and
line searches along the normalized direction for a bracketed directional
maximum. Saddles are escaped by a small Gaussian perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .container import ConstraintSet, DegeneratePair
from .envelope import ActiveSet, active_jacobian, active_set
from .hull import min_norm_point

MACHINE_STEP = 2.0 ** -52


class NumericalFailure(RuntimeError):
    pass


class NoBracket(RuntimeError):
    pass


class SaddleDetected(Exception):
    pass


@dataclass(frozen=True)
class OptimizerParams:
    epsilon0: float = 1e-7
    epsilon_max: float = 1e-3
    residual_threshold: float = 0.8
    max_iterations: int = 200
    bracket_width_tol: float = 1e-12
    stall_limit: int = 3
    perturb_sigma: float = 1e-3
    rng_seed: int = 0
    # distance of 0 from the hull of active gradients accepted as stationary
    stationary_tol: float = 1e-9
    # perturb-and-reclimb probes used to confirm a non-strict stationary point
    saddle_probes: int = 1
    perturb_retries: int = 5

    def __post_init__(self):
        if not 0 < self.epsilon0 <= self.epsilon_max:
            raise ValueError("need 0 < epsilon0 <= epsilon_max")
        if not 0 < self.residual_threshold <= 1:
            raise ValueError("residual_threshold must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.perturb_sigma <= 0:
            raise ValueError("perturb_sigma must be positive")


@dataclass
class TraceRow:
    iteration: int
    g_value: float
    active_count: int
    residual_sq: float
    step: float
    event: str


@dataclass
class LocalMaximumRecord:
    configuration: np.ndarray
    radius: float
    active: ActiveSet
    trace: list = field(default_factory=list)
    terminated_by: str = ""
    refined: bool = False

    @property
    def converged(self) -> bool:
        return self.terminated_by in ("residual", "stationary")


def ascent_direction(J):
    """Least-squares solution of ``J xi = 1`` and its squared residual.

    Uses a column-pivoted complete orthogonal factorization, so the
    minimum-norm solution is returned when ``J`` is rank deficient.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if J.shape[0] == 0:
        raise ValueError("empty active Jacobian")
    ones = np.ones(J.shape[0])
    try:
        xi = scipy.linalg.lstsq(J, ones, lapack_driver="gelsy", check_finite=False)[0]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(str(exc)) from exc
    if not np.all(np.isfinite(xi)):
        raise NumericalFailure("least-squares direction is not finite")
    r = J @ xi - ones
    return xi, float(r @ r)


def _g(cs, x):
    return float(np.min(cs.values(x)))


class _Line:
    """G restricted to ``t -> x + t * xi``.

    Squared pair distances are quadratics in ``t`` and wall values are
    affine, so their coefficients are computed once per search.
    """

    def __init__(self, cs: ConstraintSet, x, xi):
        D0 = x[cs.pair_i] - x[cs.pair_j]
        D1 = xi[cs.pair_i] - xi[cs.pair_j]
        self.a = np.einsum("pk,pk->p", D0, D0)
        self.b = 2.0 * np.einsum("pk,pk->p", D0, D1)
        self.c = np.einsum("pk,pk->p", D1, D1)
        c = cs.container
        self.w0 = (x @ c.normals.T - c.offsets).ravel()
        self.w1 = (xi @ c.normals.T).ravel()

    def __call__(self, ts) -> np.ndarray:
        t = np.asarray(ts, dtype=float)[:, None]
        sq = self.a + t * (self.b + t * self.c)
        pairs = 0.5 * np.sqrt(np.maximum(sq, 0.0)).min(axis=1)
        return np.minimum(pairs, (self.w0 + t * self.w1).min(axis=1))


def g_along(cs: ConstraintSet, x, xi, ts) -> np.ndarray:
    """G(x + t * xi) for every t in ``ts`` in one vectorized pass."""
    x = np.asarray(x, dtype=float).reshape(cs.n, cs.d)
    xi = np.asarray(xi, dtype=float).reshape(cs.n, cs.d)
    return _Line(cs, x, xi)(ts)


HALF_GRID = np.linspace(0.0, 1.0, 17)


def line_search(cs: ConstraintSet, x, xi, params: OptimizerParams = OptimizerParams()):
    """Bracket and locate a directional maximum of G along unit ``xi``.

    Starts from ``t1 = 0`` and ``t2 = 2**-52`` and doubles ``t3`` until G
    decreases, then shrinks the bracket by evaluating G on an evenly spaced
    grid on each side of ``t2`` and keeping the neighbours of the best grid
    point. Returns ``(t2, (t1, t2, t3))``. Raises :class:`SaddleDetected`
    if G drops over the first machine-precision step and
    :class:`NoBracket` if G keeps growing far beyond the container.
    """
    x = np.asarray(x, dtype=float).reshape(cs.n, cs.d)
    xi = np.asarray(xi, dtype=float).reshape(cs.n, cs.d)
    G = _Line(cs, x, xi)
    t_max = 10.0 * cs.container.diameter
    ts = MACHINE_STEP * 2.0 ** np.arange(0, int(np.log2(t_max / MACHINE_STEP)) + 2)
    gs = G(np.concatenate([[0.0], ts]))
    g0, gs = gs[0], gs[1:]
    if gs[0] < g0:
        raise SaddleDetected()
    # rounding noise dominates the first doublings; ignore drops below it
    noise = 8.0 * np.finfo(float).eps * max(1.0, abs(g0))
    t1, t2, g2 = 0.0, ts[0], gs[0]
    for k in range(1, len(ts)):
        t3, g3 = ts[k], gs[k]
        if g3 < g2 - (noise if t3 < 1e-12 else 0.0):
            break
        if g3 > g2 or t3 >= 1e-12:
            t1, t2, g2 = t2, t3, g3
    else:
        raise NoBracket("G keeps increasing along the search direction")

    a, b, c = t1, t2, t3
    mid = len(HALF_GRID) - 1
    while c - a > params.bracket_width_tol:
        grid = np.concatenate([a + (b - a) * HALF_GRID, b + (c - b) * HALF_GRID[1:]])
        grid[mid] = b
        vals = G(grid)
        k = int(np.argmax(vals))
        if vals[mid] >= vals[k]:
            k = mid
        a, b, c = grid[k - 1], grid[k], grid[k + 1]
    return b, (a, b, c)


def perturb(x, sigma, rng):
    """Add independent N(0, sigma^2) noise to every coordinate."""
    x = np.asarray(x, dtype=float)
    if sigma == 0:
        return x.copy()
    return x + rng.normal(0.0, sigma, size=x.shape)


def _is_strict(J, weights, nd):
    """Positive hull weights on gradients spanning R^nd certify a strict maximum."""
    support = J[weights > 1e-10]
    if support.shape[0] < nd + 1:
        return False
    return np.linalg.matrix_rank(support, tol=1e-9) == nd


def maximize(cs: ConstraintSet, x0, params: OptimizerParams = OptimizerParams(), rng=None):
    """Run one local maximization of G from ``x0``.

    Returns the best iterate as a :class:`LocalMaximumRecord`. The
    termination reason is one of ``residual`` (the least-squares residual
    reached ``residual_threshold`` times the active count with 0 in the
    active gradient hull), ``stationary`` (0 in the hull, confirmed strict
    or by perturbation probes), ``stalled``, ``max-iterations`` or
    ``perturb-exhausted``.
    """
    if rng is None:
        rng = np.random.default_rng(params.rng_seed)
    x = cs.check(x0).copy()
    nd = cs.n * cs.d
    eps = params.epsilon0
    trace = []
    g = _g(cs, x)
    best_x, best_g = x.copy(), g
    stalls = 0
    failures = 0
    confirmations = 0
    probe_ref = None
    prev_count = None
    reason = "max-iterations"

    def do_perturb(it, count, res):
        nonlocal x, g, failures
        failures += 1
        x = perturb(x, params.perturb_sigma, rng)
        g = _g(cs, x)
        trace.append(TraceRow(it, g, count, res, 0.0, "perturb"))

    for it in range(params.max_iterations):
        try:
            act = active_set(cs, x, eps)
            m = len(act)
            if prev_count is not None and m < prev_count and eps < params.epsilon_max:
                # active functions were lost by the last step
                while m < prev_count and eps < params.epsilon_max:
                    eps = min(10.0 * eps, params.epsilon_max)
                    act = active_set(cs, x, eps)
                    m = len(act)
                trace.append(TraceRow(it, g, m, float("nan"), 0.0, "epsilon-increase"))
            J = active_jacobian(cs, x, act)
            xi, res = ascent_direction(J)
            if eps > params.epsilon0 and (res >= params.residual_threshold * m or np.min(J @ xi) <= 0.0):
                # the widened set gives no ascent; certify only on the base set
                eps = params.epsilon0
                act = active_set(cs, x, eps)
                m = len(act)
                J = active_jacobian(cs, x, act)
                xi, res = ascent_direction(J)
        except (DegeneratePair, NumericalFailure):
            if failures >= params.perturb_retries:
                reason = "perturb-exhausted"
                break
            do_perturb(it, 0, float("nan"))
            prev_count = None
            continue

        direction = xi
        if res >= params.residual_threshold * m or np.min(J @ xi) <= 0.0:
            hull_pt, weights = min_norm_point(J)
            if np.linalg.norm(hull_pt) <= params.stationary_tol:
                if res >= params.residual_threshold * m:
                    reason = "residual"
                    break
                if _is_strict(J, weights, nd):
                    reason = "stationary"
                    break
                # possibly a saddle: perturb, climb again, compare
                if probe_ref is not None and g <= probe_ref + 1e-9:
                    confirmations += 1
                else:
                    confirmations = 0
                    probe_ref = g
                if confirmations >= params.saddle_probes:
                    reason = "stationary"
                    break
                do_perturb(it, m, res)
                failures = 0
                prev_count = None
                continue
            direction = hull_pt

        unit = direction / np.linalg.norm(direction)
        try:
            t2, _ = line_search(cs, x, unit, params)
        except (SaddleDetected, NoBracket):
            if failures >= params.perturb_retries:
                reason = "perturb-exhausted"
                break
            do_perturb(it, m, res)
            prev_count = None
            continue

        x = x + t2 * unit.reshape(x.shape)
        g = _g(cs, x)
        failures = 0
        trace.append(TraceRow(it, g, m, res, t2, "step"))
        if g > best_g:
            best_x, best_g = x.copy(), g
        if t2 < params.bracket_width_tol:
            stalls += 1
            if stalls >= params.stall_limit:
                reason = "stalled"
                break
        else:
            stalls = 0
        eps = params.epsilon0
        prev_count = m

    if g > best_g:
        best_x, best_g = x.copy(), g
    final = active_set(cs, best_x, params.epsilon0)
    trace.append(TraceRow(it, best_g, len(final), float("nan"), 0.0, reason))
    return LocalMaximumRecord(best_x, best_g, final, trace, reason)
