"""Small dense simplex method for ``max c.z`` s.t. ``A z <= b``, ``0 <= z <= u``.

Requires ``b >= 0`` so the all-slack basis is feasible and no phase one is
needed; every LP built by the rigidity test has this form. Pivoting uses
Bland's rule, which cannot cycle on the heavily degenerate cone problems.
"""

import numpy as np


class LPFailure(RuntimeError):
    pass


def simplex_max(c, A, b, upper=None, tol=1e-11, max_pivots=10000):
    """Return ``(z, value)`` maximizing ``c @ z``.

    Finite ``upper`` bounds are added as rows ``z_k <= u_k``.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, len(c))
    b = np.asarray(b, dtype=float).ravel()
    nv = len(c)
    if upper is not None:
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (nv,))
        fin = np.flatnonzero(np.isfinite(upper))
        A = np.vstack([A, np.eye(nv)[fin]])
        b = np.concatenate([b, upper[fin]])
    if np.any(b < 0):
        raise LPFailure("right-hand side must be non-negative")
    m = len(b)
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = -c
    basis = list(range(nv, nv + m))

    for _ in range(max_pivots):
        red = T[m, :-1]
        entering = np.flatnonzero(red < -tol)
        if entering.size == 0:
            break
        e = int(entering[0])
        col = T[:m, e]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            raise LPFailure("LP is unbounded")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = int(min(ties, key=lambda k: basis[k]))
        T[r] /= T[r, e]
        factor = T[:, e].copy()
        factor[r] = 0.0
        T -= np.outer(factor, T[r])
        basis[r] = e
    else:
        raise LPFailure("pivot limit reached")

    z = np.zeros(nv + m)
    z[basis] = T[:m, -1]
    return z[:nv], float(T[m, -1])
