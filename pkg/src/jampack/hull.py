"""Minimum-norm point of a convex hull (Wolfe's algorithm)."""

import numpy as np


def min_norm_point(P, tol=1e-14, max_iter=500):
    """Point of ``conv(rows of P)`` closest to the origin.

    Returns ``(point, weights)`` with ``weights >= 0`` summing to one and
    ``point = weights @ P``.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    scale = max(float(np.max(np.einsum("ij,ij->i", P, P))), 1e-300)
    lam = np.zeros(m)
    k = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    S = [k]
    lam[k] = 1.0
    x = P[k].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        while True:
            Q = P[S]
            # affine minimizer over aff(S): Q Q^T a + mu 1 = 0, sum a = 1
            k = len(S)
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = Q @ Q.T
            K[:k, k] = 1.0
            K[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            alpha = np.linalg.lstsq(K, rhs, rcond=None)[0][:k]
            if np.all(alpha > 1e-15):
                lam[:] = 0.0
                lam[S] = alpha
                break
            cur = lam[S]
            neg = alpha <= 1e-15
            ratios = cur[neg] / (cur[neg] - alpha[neg])
            theta = float(np.min(ratios)) if ratios.size else 0.0
            new = cur + theta * (alpha - cur)
            new[new <= 1e-15] = 0.0
            lam[:] = 0.0
            lam[S] = new
            S = [s for s in S if lam[s] > 0.0]
            if not S:
                # numerical collapse; restart from the best single vertex
                S = [j]
                lam[j] = 1.0
                break
        lam /= lam.sum()
        x = lam @ P
    return x, lam
