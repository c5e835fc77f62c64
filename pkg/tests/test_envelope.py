import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import GRID_2x2, TWO_DISK_R, two_disk_max
from jampack.container import Pair, WallContact, build_cube_constraints, hyperoctahedral_maps
from jampack.envelope import (
    active_jacobian,
    active_set,
    argmin_id,
    directional_derivative,
    g_value,
    is_admissible,
)

DIAG = np.array([[0.25, 0.25], [0.75, 0.75]])


def test_g_value_examples(cs22, cs42):
    assert g_value(cs22, DIAG) == 0.25
    assert g_value(cs42, GRID_2x2) == 0.25
    assert g_value(cs22, np.array([[-0.1, 0.5], [0.6, 0.5]])) == pytest.approx(-0.1)
    assert argmin_id(cs22, np.array([[-0.1, 0.5], [0.6, 0.5]])) == WallContact(0, 0)


def test_admissibility(cs22, cs42):
    assert is_admissible(cs42, GRID_2x2, 0.25)
    assert not is_admissible(cs42, GRID_2x2, 0.2500001)
    assert is_admissible(cs22, np.array([[0.1, 0.2], [0.7, 0.9]]), 0.0)
    with pytest.raises(ValueError):
        is_admissible(cs22, DIAG, -1.0)


def test_active_set_examples(cs22, cs42):
    act = active_set(cs42, GRID_2x2, 1e-9)
    ids = act.ids(cs42)
    assert len(act) == 12
    assert sum(isinstance(c, Pair) for c in ids) == 4
    assert Pair(0, 3) not in ids and Pair(1, 2) not in ids
    act = active_set(cs22, DIAG, 1e-9)
    assert len(act) == 4 and all(isinstance(c, WallContact) for c in act.ids(cs22))
    act = active_set(cs22, DIAG, 0.2)
    assert len(act) == 5 and Pair(0, 1) in act.ids(cs22)
    assert np.all(act.values <= act.g_value + act.epsilon)


def test_active_jacobian_shapes(cs22, cs42):
    x = two_disk_max()
    J = active_jacobian(cs22, x, active_set(cs22, x, 1e-9))
    assert J.shape == (5, 4)
    J = active_jacobian(cs42, GRID_2x2, active_set(cs42, GRID_2x2, 1e-9))
    assert J.shape == (12, 8)
    x = np.array([[0.1, 0.5], [0.6, 0.5]])
    J = active_jacobian(cs22, x, active_set(cs22, x, 1e-12))
    np.testing.assert_array_equal(J, [[1.0, 0.0, 0.0, 0.0]])


def test_directional_derivative_examples(cs22, rng):
    act = active_set(cs22, DIAG, 1e-9)
    v = np.array([0.25, 0.25, 0.0, 0.0])  # sphere 0 toward the center
    assert directional_derivative(cs22, DIAG, act, v) == 0.0
    v = np.array([0.25, 0.25, -0.25, -0.25])
    assert directional_derivative(cs22, DIAG, act, v) > 0
    for lam in (0.5, 3.0):
        assert directional_derivative(cs22, DIAG, act, lam * v) == pytest.approx(
            lam * directional_derivative(cs22, DIAG, act, v), rel=1e-15)
    with pytest.raises(ValueError):
        directional_derivative(cs22, DIAG, act, np.zeros(4))

    x = two_disk_max()
    act = active_set(cs22, x, 1e-9)
    for _ in range(100):
        v = rng.normal(size=4)
        assert directional_derivative(cs22, x, act, v / np.linalg.norm(v)) <= 1e-10


def test_two_disk_value():
    cs = build_cube_constraints(2, 2)
    assert g_value(cs, two_disk_max()) == pytest.approx(TWO_DISK_R, abs=1e-15)


def test_lipschitz_random_pairs(rng):
    cs = build_cube_constraints(4, 3)
    for _ in range(1000):
        x, y = rng.uniform(-0.5, 1.5, size=(2, 4, 3))
        assert abs(g_value(cs, x) - g_value(cs, y)) <= np.linalg.norm(x - y) + 1e-12


configs = arrays(np.float64, (4, 2), elements=st.floats(-0.5, 1.5))


@given(configs, configs)
def test_lipschitz_property(x, y):
    cs = build_cube_constraints(4, 2)
    assert abs(g_value(cs, x) - g_value(cs, y)) <= np.linalg.norm(x - y) + 1e-12


@given(configs, st.floats(0, 0.1), st.floats(0, 0.1))
def test_active_sets_monotone(x, e1, e2):
    cs = build_cube_constraints(4, 2)
    lo, hi = sorted((e1, e2))
    assert set(active_set(cs, x, lo).labels) <= set(active_set(cs, x, hi).labels)


@given(configs, st.permutations(range(4)), st.integers(0, 7))
def test_g_symmetry(x, perm, g):
    cs = build_cube_constraints(4, 2)
    A, t = hyperoctahedral_maps(2)[g]
    y = (x @ A.T + t)[list(perm)]
    assert abs(g_value(cs, x) - g_value(cs, y)) <= 1e-15


@given(configs, st.floats(0, 0.5))
def test_sublevel_characterization(x, r):
    cs = build_cube_constraints(4, 2)
    assert is_admissible(cs, x, r) == (g_value(cs, x) >= r)


@given(configs)
def test_envelope_consistency(x):
    cs = build_cube_constraints(4, 2)
    assert g_value(cs, x) == min(cs.evaluate(c, x) for c in cs.ids)
    act = active_set(cs, x, 0.0)
    assert cs.ids[act.labels[0]] == argmin_id(cs, x)
