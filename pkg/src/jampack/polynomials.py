"""Real roots of integer polynomials and matching radii against reference polynomials.

Signs are decided exactly: a float Horner value is trusted only when it
exceeds its rounding-error bound, otherwise the polynomial is evaluated in
integer arithmetic at the (dyadic) sample point. This keeps the sign scan
reliable for the degree-96 entries with 50-digit coefficients.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

MATCH_TOL = 1e-8


@dataclass(frozen=True)
class ReferencePolynomial:
    label: str
    n: int
    d: int
    coeffs: tuple  # ascending by degree
    note: str = ""

    def __post_init__(self):
        if not self.coeffs or self.coeffs[-1] == 0:
            raise ValueError(f"{self.label}: leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def mirrored(self) -> tuple:
        """Coefficients of ``p(-t)``."""
        return tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs))


@dataclass(frozen=True)
class PolynomialMatch:
    matched: bool
    nearest_root: float
    abs_gap: float
    mirrored: bool = False


def exact_sign(coeffs, t: float) -> int:
    """Sign of the integer polynomial at the float ``t``, computed exactly."""
    num, den = float(t).as_integer_ratio()
    deg = len(coeffs) - 1
    acc = 0
    dpow = 1
    # sum c_k num^k den^(deg-k), Horner in num with den powers folded in
    for c in reversed(coeffs):
        acc = acc * num + c * dpow
        dpow *= den
    return (acc > 0) - (acc < 0)


def _float_eval(coeffs, t):
    """Horner values and a rigorous-enough error bound at the points ``t``."""
    c = np.asarray([float(v) for v in coeffs])
    t = np.asarray(t, dtype=float)
    val = np.zeros_like(t)
    mag = np.zeros_like(t)
    at = np.abs(t)
    for ck in c[::-1]:
        val = val * t + ck
        mag = mag * at + abs(ck)
    bound = 4.0 * len(c) * np.finfo(float).eps * mag
    return val, bound


def signs_at(coeffs, t) -> np.ndarray:
    val, bound = _float_eval(coeffs, t)
    out = np.sign(val).astype(int)
    unsure = np.flatnonzero(np.abs(val) <= bound)
    if unsure.size:
        out[unsure] = _exact_signs_dyadic(coeffs, np.asarray(t)[unsure])
    return out


def _exact_signs_dyadic(coeffs, t) -> np.ndarray:
    """Exact signs at float points sharing one power-of-two denominator."""
    t = np.asarray(t, dtype=float)
    e = 0
    while not np.all(np.ldexp(t, e) == np.round(np.ldexp(t, e))):
        e += 1
        if e > 1100:
            return np.array([exact_sign(coeffs, float(v)) for v in t])
    m = np.array([int(v) for v in np.ldexp(t, e)], dtype=object)
    deg = len(coeffs) - 1
    acc = np.full(len(t), int(coeffs[-1]), dtype=object)
    for k in range(deg - 1, -1, -1):
        acc = acc * m + (int(coeffs[k]) << (e * (deg - k)))
    return np.array([(v > 0) - (v < 0) for v in acc], dtype=int)


def _bisect(coeffs, a, b, sa, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        sm = exact_sign(coeffs, m)
        if sm == 0:
            return m
        if sm == sa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def derivative(coeffs) -> tuple:
    return tuple(k * c for k, c in enumerate(coeffs))[1:]


def real_roots(coeffs, lo=-2.0, hi=2.0, samples=100_000, tol=1e-14) -> list:
    """All real roots in ``[lo, hi]``: sign scan, then bisection.

    The scan uses at least ``samples`` cells of power-of-two width so every
    sample point is exactly representable. Cells without a sign change are
    re-examined where the derivative changes sign, which recovers pairs of
    roots closer than the scan spacing.
    """
    coeffs = tuple(int(c) for c in coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if len(coeffs) <= 1:
        return []
    return list(_real_roots(coeffs, float(lo), float(hi), int(samples), float(tol)))


@functools.lru_cache(maxsize=256)
def _real_roots(coeffs, lo, hi, samples, tol):
    h = 2.0 ** math.floor(math.log2((hi - lo) / samples))
    lo, hi = math.floor(lo / h) * h, math.ceil(hi / h) * h
    grid = lo + h * np.arange(int(round((hi - lo) / h)) + 1)
    s = signs_at(coeffs, grid)
    roots = [float(grid[k]) for k in np.flatnonzero(s == 0)]
    change = np.flatnonzero(s[:-1] * s[1:] < 0)
    for k in change:
        roots.append(_bisect(coeffs, grid[k], grid[k + 1], s[k], tol))

    if len(coeffs) > 2:
        dc = derivative(coeffs)
        ds = signs_at(dc, grid)
        for k in np.flatnonzero(ds[:-1] * ds[1:] < 0):
            if s[k] * s[k + 1] <= 0:
                continue
            c = _bisect(dc, grid[k], grid[k + 1], ds[k], tol)
            sc = exact_sign(coeffs, c)
            if sc == 0:
                roots.append(c)
            elif sc != s[k]:
                roots.append(_bisect(coeffs, grid[k], c, s[k], tol))
                roots.append(_bisect(coeffs, c, grid[k + 1], sc, tol))
    return tuple(sorted(roots))


def first_positive_root(coeffs, **kw):
    pos = [r for r in real_roots(coeffs, **kw) if r > 0]
    return pos[0] if pos else None


def polynomial_check(r: float, p: ReferencePolynomial, tol: float = MATCH_TOL) -> PolynomialMatch:
    """Compare a radius against the real roots of ``p`` and of ``p(-t)``.

    The mirrored polynomial guards against sign-convention slips in the
    printed tables. ``nearest_root`` is ``nan`` when neither has a real
    root in ``[-2, 2]``.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    best = (math.inf, math.nan, False)
    for mirrored, coeffs in ((False, p.coeffs), (True, p.mirrored())):
        for root in real_roots(coeffs):
            gap = abs(root - r)
            if gap < best[0]:
                best = (gap, root, mirrored)
    gap, root, mirrored = best
    return PolynomialMatch(gap <= tol, root, gap, mirrored)


def parse_polynomial_line(line: str) -> ReferencePolynomial:
    body, _, note = line.partition("#")
    parts = body.split()
    label, n, d = parts[0], int(parts[1]), int(parts[2])
    return ReferencePolynomial(label, n, d, tuple(int(c) for c in parts[3:]), note.strip())


def load_reference_polynomials(path=None) -> list:
    """Records ``label n d c0 c1 ... ck`` (``#`` starts a comment)."""
    if path is None:
        text = resources.files("jampack.data").joinpath("tables1-6.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    out = []
    for line in text.splitlines():
        if not line.split("#", 1)[0].strip():
            continue
        out.append(parse_polynomial_line(line))
    return out


def match_radius(r: float, polys, n=None, d=None, tol=MATCH_TOL):
    """Label of the first reference polynomial (for ``n``, ``d`` if given) with a root at ``r``."""
    for p in polys:
        if (n is not None and p.n != n) or (d is not None and p.d != d):
            continue
        m = polynomial_check(r, p, tol)
        if m.matched:
            return p.label, m
    return None, None
