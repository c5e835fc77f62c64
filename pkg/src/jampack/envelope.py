"""The maximal radius function G (lower envelope of the constraint family)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import ConstraintSet


@dataclass(frozen=True)
class ActiveSet:
    """Functions within ``epsilon`` of the envelope at a point.

    ``labels`` index into ``cs.ids`` and are sorted, so the first label
    attaining ``g_value`` is the canonical minimizer.
    """

    labels: np.ndarray
    values: np.ndarray
    epsilon: float
    g_value: float

    def __len__(self):
        return len(self.labels)

    def ids(self, cs: ConstraintSet) -> list:
        return [cs.ids[k] for k in self.labels]


def g_value(cs: ConstraintSet, x) -> float:
    """Largest common radius the centers in ``x`` admit; negative if a center is outside."""
    return float(np.min(cs.values(x)))


def argmin_id(cs: ConstraintSet, x):
    return cs.ids[int(np.argmin(cs.values(x)))]


def is_admissible(cs: ConstraintSet, x, r: float) -> bool:
    if r < 0:
        raise ValueError("radius must be non-negative")
    return g_value(cs, x) >= r


def active_set(cs: ConstraintSet, x, epsilon: float) -> ActiveSet:
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    vals = cs.values(x)
    g = vals.min()
    labels = np.flatnonzero(vals <= g + epsilon)
    return ActiveSet(labels, vals[labels], float(epsilon), float(g))


def active_jacobian(cs: ConstraintSet, x, active: ActiveSet) -> np.ndarray:
    return cs.jacobian(active.labels, x)


def directional_derivative(cs: ConstraintSet, x, active: ActiveSet, v) -> float:
    """Generalized directional derivative: smallest active slope along ``v``."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.any(v):
        raise ValueError("direction must be nonzero")
    return float(np.min(active_jacobian(cs, x, active) @ v))
