"""Containers and the constraint family of the maximal radius function.

A container is an intersection of half-spaces ``{y : a . y >= b}`` with unit
inward normals ``a``. For ``n`` spheres the constraint family consists of

* one pair function per unordered pair ``i < j``: ``|x_i - x_j| / 2``
* one wall function per (sphere, wall): ``a . x_i - b``

listed in canonical order: all pairs lexicographically, then all wall
contacts by ``(sphere, wall)``. Sphere and wall indices are 0-based.

Configurations are float arrays of shape ``(n, d)``; the flat optimizer
vector is ``x.ravel()`` so that entry ``i * d + k`` holds coordinate ``k`` of
sphere ``i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import linprog

NORMAL_TOL = 1e-12
COINCIDENT_TOL = 1e-14


class InvalidContainer(ValueError):
    pass


class DegeneratePair(ArithmeticError):
    """Two sphere centers coincide, so the pair gradient is undefined."""


class Pair(NamedTuple):
    i: int
    j: int

    def __str__(self):
        return f"pair({self.i},{self.j})"


class WallContact(NamedTuple):
    sphere: int
    wall: int

    def __str__(self):
        return f"wall({self.sphere},{self.wall})"


ConstraintId = Union[Pair, WallContact]


@dataclass(frozen=True)
class Wall:
    normal: tuple
    offset: float

    def __post_init__(self):
        if abs(math.hypot(*self.normal) - 1.0) > NORMAL_TOL:
            raise InvalidContainer(f"wall normal {self.normal} is not a unit vector")


@dataclass(frozen=True, eq=False)
class Container:
    """Compact convex region ``{y : normals @ y >= offsets}``."""

    d: int
    walls: tuple
    kind: str = "polytope"
    normals: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)
    bounds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        if not self.walls:
            raise InvalidContainer("container needs at least one wall")
        for w in self.walls:
            if len(w.normal) != self.d:
                raise InvalidContainer("wall normal has wrong dimension")
        normals = np.array([w.normal for w in self.walls], dtype=float)
        offsets = np.array([w.offset for w in self.walls], dtype=float)
        normals.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "bounds", _check_polytope(normals, offsets))

    @property
    def n_walls(self) -> int:
        return len(self.walls)

    @property
    def diameter(self) -> float:
        lo, hi = self.bounds
        return float(np.linalg.norm(hi - lo))

    def contains(self, points, tol=0.0) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all(points @ self.normals.T - self.offsets >= -tol, axis=1)

    def symmetries(self, group: str = "auto") -> list:
        """Affine maps ``y -> A @ y + t`` preserving the container.

        ``group`` is ``"auto"`` (full group for presets, identity otherwise),
        ``"cube"``, ``"triangle"`` or ``"identity"``.
        """
        if group == "auto":
            group = {"cube": "cube", "triangle2": "triangle"}.get(self.kind, "identity")
        if group == "identity":
            return [(np.eye(self.d), np.zeros(self.d))]
        if group == "cube":
            return hyperoctahedral_maps(self.d)
        if group == "triangle":
            return _triangle_maps()
        raise ValueError(f"unknown symmetry group {group!r}")

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "polytope":
            out["walls"] = [[*map(float, w.normal), float(w.offset)] for w in self.walls]
        return out


def _check_polytope(normals, offsets):
    """Bounding box of the polytope; raises if unbounded or without interior."""
    W, d = normals.shape
    # Chebyshev-style interior check: maximize s with a.y - b >= s
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A = np.hstack([-normals, np.ones((W, 1))])
    res = linprog(c, A_ub=A, b_ub=-offsets, bounds=[(None, None)] * d + [(None, 1.0)])
    if res.status != 0 or -res.fun <= 1e-12:
        raise InvalidContainer("half-spaces have empty interior")
    lo = np.empty(d)
    hi = np.empty(d)
    for k in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[k] = sign
            res = linprog(c, A_ub=-normals, b_ub=-offsets, bounds=[(None, None)] * d)
            if res.status != 0:
                raise InvalidContainer("half-spaces do not bound a compact region")
            if sign > 0:
                lo[k] = res.fun
            else:
                hi[k] = -res.fun
    box = np.array([lo, hi])
    box.setflags(write=False)
    return box


def unit_cube(d: int) -> Container:
    """``[0,1]^d``; wall ``2k`` is ``x_k >= 0`` and wall ``2k+1`` is ``1 - x_k >= 0``."""
    walls = []
    for k in range(d):
        e = [0.0] * d
        e[k] = 1.0
        walls.append(Wall(tuple(e), 0.0))
        e = [0.0] * d
        e[k] = -1.0
        walls.append(Wall(tuple(e), -1.0))
    return Container(d, tuple(walls), kind="cube")


TRIANGLE_VERTICES = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, math.sqrt(3.0)]])


def triangle2() -> Container:
    """Equilateral triangle of side 2 with vertices (0,0), (2,0), (1, sqrt 3)."""
    s = math.sqrt(3.0) / 2.0
    walls = (
        Wall((0.0, 1.0), 0.0),
        Wall((s, -0.5), 0.0),
        Wall((-s, -0.5), -math.sqrt(3.0)),
    )
    return Container(2, walls, kind="triangle2")


def polytope(walls) -> Container:
    """General polytope from rows ``(a_1, ..., a_d, b)``; normals are normalized."""
    walls = np.asarray(walls, dtype=float)
    if walls.ndim != 2 or walls.shape[1] < 3:
        raise InvalidContainer("polytope walls must be rows a_1 .. a_d b with d >= 2")
    out = []
    for row in walls:
        a, b = row[:-1], row[-1]
        norm = np.linalg.norm(a)
        if norm == 0:
            raise InvalidContainer("zero wall normal")
        out.append(Wall(tuple(float(v) for v in a / norm), float(b / norm)))
    return Container(walls.shape[1] - 1, tuple(out), kind="polytope")


def make_container(kind: str, d: int = 2, walls=None) -> Container:
    if kind == "cube":
        return unit_cube(d)
    if kind == "triangle2":
        if d != 2:
            raise InvalidContainer("triangle2 is two-dimensional")
        return triangle2()
    if kind == "polytope":
        if walls is None:
            raise InvalidContainer("polytope container needs walls")
        c = polytope(walls)
        if c.d != d:
            raise InvalidContainer(f"walls are {c.d}-dimensional, expected {d}")
        return c
    raise InvalidContainer(f"unknown container kind {kind!r}")


def hyperoctahedral_maps(d: int) -> list:
    """All ``2^d d!`` signed coordinate permutations fixing ``[0,1]^d``."""
    maps = []
    center = np.full(d, 0.5)
    for perm in itertools.permutations(range(d)):
        P = np.eye(d)[list(perm)]
        for signs in itertools.product((1.0, -1.0), repeat=d):
            A = np.diag(signs) @ P
            maps.append((A, center - A @ center))
    return maps


def _triangle_maps() -> list:
    centroid = TRIANGLE_VERTICES.mean(axis=0)
    maps = []
    for k in range(3):
        a = 2.0 * math.pi * k / 3.0
        R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
        for F in (np.eye(2), np.diag([-1.0, 1.0])):
            A = R @ F
            maps.append((A, centroid - A @ centroid))
    return maps


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """The constraint family for ``n`` spheres in ``container``.

    ``values(x)`` evaluates every function at once in canonical order; the
    position of a function in that vector is its integer label.
    """

    container: Container
    n: int
    ids: tuple = field(init=False, repr=False)
    pair_i: np.ndarray = field(init=False, repr=False)
    pair_j: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two spheres")
        iu, ju = np.triu_indices(self.n, k=1)
        ids = [Pair(int(i), int(j)) for i, j in zip(iu, ju)]
        ids += [WallContact(i, w) for i in range(self.n) for w in range(self.container.n_walls)]
        object.__setattr__(self, "ids", tuple(ids))
        object.__setattr__(self, "pair_i", iu)
        object.__setattr__(self, "pair_j", ju)

    @property
    def d(self) -> int:
        return self.container.d

    @property
    def n_pairs(self) -> int:
        return len(self.pair_i)

    def __len__(self):
        return len(self.ids)

    def index(self, cid) -> int:
        if isinstance(cid, Pair):
            i, j = sorted(cid)
            n = self.n
            return i * n - i * (i + 1) // 2 + (j - i - 1)
        return self.n_pairs + cid.sphere * self.container.n_walls + cid.wall

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size != self.n * self.d:
            raise ValueError(f"configuration has {x.size} coordinates, expected {self.n * self.d}")
        x = x.reshape(self.n, self.d)
        if not np.all(np.isfinite(x)):
            raise ValueError("configuration has non-finite coordinates")
        return x

    def pair_values(self, x) -> np.ndarray:
        diff = x[self.pair_i] - x[self.pair_j]
        return 0.5 * np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def wall_values(self, x) -> np.ndarray:
        c = self.container
        return (x @ c.normals.T - c.offsets).ravel()

    def values(self, x) -> np.ndarray:
        x = self.check(x)
        return np.concatenate([self.pair_values(x), self.wall_values(x)])

    def evaluate(self, cid, x) -> float:
        x = self.check(x)
        if isinstance(cid, Pair):
            return float(np.linalg.norm(x[cid.i] - x[cid.j]) / 2.0)
        c = self.container
        return float(c.normals[cid.wall] @ x[cid.sphere] - c.offsets[cid.wall])

    def gradient(self, cid, x) -> np.ndarray:
        return self.jacobian([self.index(cid)], x)[0]

    def jacobian(self, labels, x) -> np.ndarray:
        """Rows are gradients (length ``n*d``) of the functions with the given labels."""
        x = self.check(x)
        n, d = x.shape
        labels = np.asarray(labels, dtype=int)
        J = np.zeros((len(labels), n * d))
        npairs = self.n_pairs
        for row, lab in enumerate(labels):
            if lab < npairs:
                i, j = self.pair_i[lab], self.pair_j[lab]
                diff = x[i] - x[j]
                dist = np.linalg.norm(diff)
                if dist < COINCIDENT_TOL:
                    raise DegeneratePair(f"spheres {i} and {j} coincide")
                g = diff / (2.0 * dist)
                J[row, i * d:(i + 1) * d] = g
                J[row, j * d:(j + 1) * d] = -g
            else:
                i, w = divmod(lab - npairs, self.container.n_walls)
                J[row, i * d:(i + 1) * d] = self.container.normals[w]
        return J


def build_cube_constraints(n: int, d: int) -> ConstraintSet:
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    return ConstraintSet(unit_cube(d), n)


def build_polytope_constraints(n: int, container: Container) -> ConstraintSet:
    if n < 2:
        raise ValueError("need at least two spheres")
    return ConstraintSet(container, n)


def constraint_count(n: int, d: int) -> int:
    """Size of the family for the unit cube: ``n(n-1)/2 + 2nd``."""
    return n * (n - 1) // 2 + 2 * n * d
