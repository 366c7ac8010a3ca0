import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouville.cocycle import (
    alpha,
    alpha_growth_report,
    alpha_map,
    cocycle_from_spec,
    combine,
    constant_cocycle,
    make_depth_decay,
    make_dirac,
    make_seeded_bounded,
    zero_cocycle,
)
from liouville.farey import Leaf, separates


def test_dirac_alpha_examples(lam):
    c = make_dirac(lam.leaf(0, 1))
    assert alpha(c, lam.triangle(0, 1)) == 1.0
    assert alpha(c, lam.triangle(0, math.inf)) == 0.0


def test_dirac_weights(lam):
    c = make_dirac(lam.leaf(0, 1))
    assert c.weight(lam.leaf(0, 1)) == 1.0
    assert c.weight(lam.leaf(1, math.inf)) == 0.0


def test_depth_decay_weight(lam):
    c = make_depth_decay(1.0, 0.5)
    leaf = next(T.facing_leaf for T in lam.enumerate(6) if T.facing_leaf.depth == 3)
    assert c.weight(leaf) == 0.125
    with pytest.raises(ValueError):
        make_depth_decay(1.0, 1.5)


def test_seeded_deterministic_and_bounded(lam):
    c = make_seeded_bounded(7, 0.3)
    c2 = make_seeded_bounded(7, 0.3)
    for T in lam.enumerate(5):
        w = c.weight(T.facing_leaf)
        assert w == c.weight(T.facing_leaf) == c2.weight(T.facing_leaf)
        assert abs(w) <= 0.3
    with pytest.raises(ValueError):
        make_seeded_bounded(1, -1.0)


def test_weight_is_unoriented(lam):
    c = make_seeded_bounded(11, 1.0)
    for T in lam.enumerate(4):
        leaf = T.facing_leaf
        assert c.weight(leaf) == c.weight(Leaf(leaf.hi, leaf.lo, leaf.depth))


def test_bound_is_enforced(lam):
    from liouville.cocycle import TransverseCocycle
    c = TransverseCocycle(lambda leaf: 2.0, 1.0, "bad")
    with pytest.raises(ValueError):
        c.weight(lam.leaf(0, 1))


def _path_oracle(c, T, lam):
    """Sum of weights over all enumerated leaves separating O from T, found geometrically."""
    total = 0.0
    for S in [T, *T.ancestors()]:
        total += c.weight(S.facing_leaf)
    return total


@pytest.mark.parametrize("c", [make_dirac(Leaf((0, 1), (1, 1))), make_depth_decay(1.0, 0.5),
                               make_seeded_bounded(7, 0.3)])
def test_path_additivity(lam, c):
    V = lam.enumerate(5)
    amap = alpha_map(c, V)
    for T in V:
        if T.parent is not None:
            assert amap[T.key] - amap[T.parent.key] == pytest.approx(c.weight(T.facing_leaf),
                                                                     abs=1e-15)
            # exact when recomputed in the same order
            assert amap[T.parent.key] + c.weight(T.facing_leaf) == amap[T.key]
        assert amap[T.key] == pytest.approx(alpha(c, T), abs=1e-14)


def test_dirac_alpha_indicator(lam):
    g = lam.leaf(0, 1)
    c = make_dirac(g)
    T0 = lam.triangle(0, 1)
    for T in lam.enumerate(6):
        expected = 1.0 if (T == T0 or separates(T0, T)) else 0.0
        assert alpha(c, T) == expected


def test_constant_cocycle_counts_depth(lam):
    c = constant_cocycle(1.0)
    for T in lam.enumerate(6):
        assert alpha(c, T) == T.tree_depth


def test_growth_reports(lam):
    rep = alpha_growth_report(make_dirac(lam.leaf(0, 1)), 6, lam)
    assert max(abs(r[1]) for r in rep.rows) <= 1.0
    rep = alpha_growth_report(make_seeded_bounded(7, 0.3), 8, lam)
    assert rep.linear and rep.max_ratio <= 0.3
    rep = alpha_growth_report(constant_cocycle(1.0), 6, lam)
    assert rep.slope == pytest.approx(1.0)
    assert alpha_growth_report(zero_cocycle(), 4, lam).max_ratio == 0.0


@given(st.integers(0, 1000), st.floats(0.01, 5.0))
def test_linear_growth_property(seed, bound):
    from liouville.farey import FareyLamination
    lam = FareyLamination()
    c = make_seeded_bounded(seed, bound)
    amap = alpha_map(c, lam.enumerate(5))
    for T in lam.enumerate(5):
        assert abs(amap[T.key]) <= bound * (1 + T.tree_depth) + 1e-12


def test_combine_is_linear(lam):
    a = make_seeded_bounded(1, 0.5)
    b = make_depth_decay(2.0, 0.3)
    c = combine([(2.0, a), (-3.0, b)])
    for T in lam.enumerate(4):
        leaf = T.facing_leaf
        assert c.weight(leaf) == pytest.approx(2 * a.weight(leaf) - 3 * b.weight(leaf))
    assert c.bound == pytest.approx(2 * 0.5 + 3 * 2.0)
    assert (a + b).weight(leaf) == pytest.approx(a.weight(leaf) + b.weight(leaf))


def test_specs(lam):
    assert cocycle_from_spec("dirac:0/1,1/1").weight(lam.leaf(0, 1)) == 1.0
    assert cocycle_from_spec({"kind": "depth_decay", "base": 1, "ratio": 0.5}).bound == 1.0
    s = cocycle_from_spec('{"kind": "seeded", "seed": 7, "bound": 0.3}')
    assert s.weight(lam.leaf(0, 1)) == make_seeded_bounded(7, 0.3).weight(lam.leaf(0, 1))
    assert cocycle_from_spec("dirac:0/1,inf").weight(lam.leaf(0, math.inf)) == 1.0
    assert cocycle_from_spec("zero").weight(lam.leaf(0, 1)) == 0.0
    with pytest.raises(ValueError):
        cocycle_from_spec("banana")
