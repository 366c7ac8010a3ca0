import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouville.farey import OMEGA
from liouville.functions import (
    DIAGONAL_GAP,
    builtin_test_functions,
    bump,
    bump_1d,
    crossing_mass,
    holder_bump,
    linear_combination,
    make_test_function,
    smooth_step,
    symmetrized,
    disjoint_rects,
)
from liouville.functions import test_function_from_spec as function_from_spec
from liouville.hyperbolic import TWO_PI, Geodesic, geodesic_distance_from_angles

BUILTINS = builtin_test_functions()


def test_builtin_catalogue():
    names = [p.name for p in BUILTINS]
    assert names == ["bump", "holder0.5", "holder0.8", "sym(bump)", "sym(holder0.5)",
                     "sym(holder0.8)"]
    assert [p.nu for p in BUILTINS] == [1.0, 0.5, 0.8, 1.0, 0.5, 0.8]
    assert [p.balanced for p in BUILTINS] == [False] * 3 + [True] * 3


def test_bump_vanishes_outside_rectangle(phi_bump):
    assert phi_bump.eval(Geodesic.between(2.0, 3.0)) == 0.0
    a1, b1, a2, b2 = phi_bump.rects[0]
    assert phi_bump(0.5 * (a1 + b1), 0.5 * (a2 + b2)) == pytest.approx(1.0)


def test_smooth_step_symmetry():
    t = np.linspace(-3, 3, 101)
    assert np.allclose(smooth_step(t) + smooth_step(-t), 1.0)
    assert smooth_step(-1.0) == 0.0 and smooth_step(1.0) == 1.0
    assert bump_1d(np.array([0.0, 2.0]), 0.0, 2.0).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("phi", BUILTINS[3:], ids=lambda p: p.name)
def test_symmetrized_is_balanced(phi):
    rng = np.random.default_rng(1)
    r = phi.rects[0]
    t1 = rng.uniform(r[0], r[1], 100)
    t2 = rng.uniform(r[2], r[3], 100)
    assert np.allclose(phi(t1, t2), phi(t2, t1), atol=1e-15)


@pytest.mark.parametrize("phi", BUILTINS, ids=lambda p: p.name)
def test_holder_bound_by_sampling(phi):
    # 1e5 pairs drawn independently of the estimator (other seed, other scales)
    rng = np.random.default_rng(12345)
    n = 100_000
    r = phi.rects[rng.integers(len(phi.rects))]
    t1 = rng.uniform(r[0] - 0.05, r[1] + 0.05, n)
    t2 = rng.uniform(r[2] - 0.05, r[3] + 0.05, n)
    h = 10 ** rng.uniform(-6, -0.5, n)
    s1 = t1 + h * rng.uniform(-1, 1, n)
    s2 = t2 + h * rng.uniform(-1, 1, n)
    d = np.maximum(np.abs(s1 - t1), np.abs(s2 - t2))
    v0, v1 = phi(t1, t2), phi(s1, s2)
    ratio = np.abs(v1 - v0) / d ** phi.nu
    assert np.max(ratio) <= phi.holder_norm_bound
    assert np.max(np.abs(v0)) <= phi.holder_norm_bound


@pytest.mark.parametrize("phi", BUILTINS, ids=lambda p: p.name)
def test_support_radius(phi):
    rng = np.random.default_rng(7)
    t1 = rng.uniform(0, TWO_PI, 200_000)
    t2 = rng.uniform(0, TWO_PI, 200_000)
    d = geodesic_distance_from_angles(t1, t2, OMEGA)
    far = d > phi.support_radius
    assert far.sum() >= 10_000
    assert np.all(phi(t1[far][:10_000], t2[far][:10_000]) == 0.0)
    near = phi(t1, t2) != 0.0
    assert near.any()


def test_diagonal_gap_enforced():
    def fn(t1, t2):
        return bump_1d(t1, 1.0, 2.0) * bump_1d(t2, 1.5, 2.5)
    with pytest.raises(ValueError):
        make_test_function(fn, [(1.0, 2.0, 1.5, 2.5)], 1.0, "overlap")
    assert DIAGONAL_GAP == 0.2


def test_holder_bump_is_not_lipschitz():
    phi = holder_bump(0.5)
    a1, b1, a2, b2 = phi.rects[0]
    th0 = 0.5 * (a1 + b1)
    t2 = 0.5 * (a2 + b2)
    hs = np.array([1e-4, 1e-6, 1e-8])
    v = phi(th0 + hs, np.full(3, t2))
    # difference quotients blow up like h^(nu - 1)
    q = v / hs
    assert q[2] > 50 * q[0]
    assert phi(th0, t2) == 0.0


def test_crossing_mass_support():
    phi = crossing_mass(1.0, 0.05)
    assert phi.eval(Geodesic.between(2.0, -1.0)) == pytest.approx(1.0)  # crosses at height sqrt(2)
    assert phi.eval(Geodesic.between(2.0, 3.0)) == 0.0
    assert phi.eval(Geodesic.between(0.5, -0.5)) == 0.0  # crosses below i
    assert phi.eval(Geodesic.between(-1.0, 2.0)) == pytest.approx(1.0)  # either orientation
    with pytest.raises(ValueError):
        crossing_mass(-1.0, 0.1)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linear_combination(a, b):
    p, q = BUILTINS[0], BUILTINS[1]
    c = linear_combination([(a, p), (b, q)])
    t1, t2 = np.array([4.0, 4.3]), np.array([1.0, 1.5])
    assert np.allclose(c(t1, t2), a * p(t1, t2) + b * q(t1, t2))
    assert c.holder_norm_bound == pytest.approx(abs(a) * p.holder_norm_bound
                                                + abs(b) * q.holder_norm_bound)


def test_specs():
    assert function_from_spec("bump").name == "bump"
    assert function_from_spec({"kind": "holder", "nu": 0.8}).nu == 0.8
    assert function_from_spec({"kind": "bump", "symmetrize": True}).balanced
    with pytest.raises(ValueError):
        function_from_spec("wave")
    sym = symmetrized(bump())
    assert sym.support_radius == pytest.approx(bump().support_radius, rel=0.05)
    assert math.isfinite(sym.holder_norm_bound)


def test_disjoint_rects():
    assert disjoint_rects([(1, 2, 3, 4), (1, 2, 3, 4)]) == ((1, 2, 3, 4),)
    cells = disjoint_rects([(0, 2, 0, 2), (1, 3, 1, 3)])
    area = sum((r[1] - r[0]) * (r[3] - r[2]) for r in cells)
    assert area == pytest.approx(7.0)
    wrapped = disjoint_rects([(6.0, 7.0, 1.0, 2.0)])
    assert len(wrapped) == 2
    assert sum(r[1] - r[0] for r in wrapped) == pytest.approx(1.0)
