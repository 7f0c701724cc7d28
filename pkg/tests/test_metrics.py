import numpy as np
import pytest

from polarlab import (
    Channel,
    blackwell_measure,
    capacity_gap,
    deterministic_hom,
    distance_to_pol,
    enumerate_subgroups,
    make_group,
    pc_gap_lower_bound,
    subgroup_from_members,
    transport_plan,
    wasserstein,
)
from polarlab.presets import bsc_channel, identity_channel, random_channel, useless_channel

Z2 = make_group([2])
Z4 = make_group([4])


def test_wasserstein_self_distance_zero():
    m = blackwell_measure(bsc_channel(0.1))
    assert wasserstein(m, m) == 0.0


def test_wasserstein_dirac_pair():
    # two single-atom measures: cost is the TV distance of the posteriors,
    # but single balanced atoms must be uniform, so build two-atom ones
    m1 = blackwell_measure(bsc_channel(0.1))
    m2 = blackwell_measure(bsc_channel(0.3))
    # hand-solved: optimal plan matches like-ordered atoms, TV = 0.2 each
    assert wasserstein(m1, m2) == pytest.approx(0.2, abs=1e-12)


def test_wasserstein_identity_vs_useless():
    m1 = blackwell_measure(identity_channel(Z2))
    m2 = blackwell_measure(useless_channel(Z2))
    assert wasserstein(m1, m2) == pytest.approx(0.5, abs=1e-12)


def test_transport_plan_marginals():
    m1 = blackwell_measure(random_channel(Z4, 5, seed=1))
    m2 = blackwell_measure(random_channel(Z4, 3, seed=2))
    plan = transport_plan(m1, m2)
    row = np.zeros(m1.atom_count)
    col = np.zeros(m2.atom_count)
    np.add.at(row, plan.source_index, plan.mass)
    np.add.at(col, plan.target_index, plan.mass)
    assert np.abs(row - m1.weights).max() <= 1e-10
    assert np.abs(col - m2.weights).max() <= 1e-10
    assert plan.mass.min() >= 0.0


def test_wasserstein_metric_axioms_random():
    measures = [blackwell_measure(random_channel(Z4, 4, seed=s)) for s in range(9)]
    for i in range(0, 9, 3):
        a, b, c = measures[i], measures[i + 1], measures[i + 2]
        dab, dba = wasserstein(a, b), wasserstein(b, a)
        assert dab == dba  # symmetry is exact by canonical orientation
        dac, dbc = wasserstein(a, c), wasserstein(b, c)
        assert dab <= dac + dbc + 1e-9
        assert dab >= 0.0


def test_wasserstein_group_mismatch():
    with pytest.raises(ValueError):
        wasserstein(
            blackwell_measure(identity_channel(Z2)),
            blackwell_measure(identity_channel(Z4)),
        )


def test_pc_gap_lower_bound_examples():
    ident = blackwell_measure(identity_channel(Z2))
    useless = blackwell_measure(useless_channel(Z2))
    assert pc_gap_lower_bound(ident, useless) >= 0.5 - 1e-9
    # equal canonical measures: zero gap for every source
    w = bsc_channel(0.1)
    split = Channel(
        np.column_stack([w.kernel[:, 0] / 2, w.kernel[:, 0] / 2, w.kernel[:, 1]]),
        ("a", "b", "c"),
        Z2,
    )
    assert pc_gap_lower_bound(blackwell_measure(w), blackwell_measure(split)) == 0.0


def test_pc_gap_lower_bound_monotone_in_trials():
    m1 = blackwell_measure(random_channel(Z4, 4, seed=4))
    m2 = blackwell_measure(random_channel(Z4, 4, seed=5))
    values = [pc_gap_lower_bound(m1, m2, trials=t, seed=0) for t in (1, 4, 16, 64)]
    assert values == sorted(values)


def test_pc_gap_never_exceeds_twice_wasserstein_scale():
    # sanity: the bound is a genuine distance lower bound, so it vanishes on
    # equal measures and is bounded by 1
    m1 = blackwell_measure(random_channel(Z4, 4, seed=6))
    assert pc_gap_lower_bound(m1, m1) == 0.0
    m2 = blackwell_measure(random_channel(Z4, 4, seed=7))
    assert 0.0 <= pc_gap_lower_bound(m1, m2) <= 1.0


def test_pol_set_and_distance_fixed_points():
    for orders in ([2], [4], [2, 2], [6]):
        g = make_group(orders)
        for sub in enumerate_subgroups(g):
            m = blackwell_measure(deterministic_hom(g, sub))
            dist, nearest = distance_to_pol(m)
            assert dist == 0.0
            assert nearest == sub


def test_distance_to_pol_uniform_atom():
    m = blackwell_measure(useless_channel(Z4))
    dist, nearest = distance_to_pol(m)
    assert dist == 0.0
    assert nearest.members == (0, 1, 2, 3)


def test_distance_to_pol_bsc():
    # derived with the transport oracle: nearest fixed point is the identity
    # projection at cost TV((0.9,0.1),(1,0)) = 0.1
    m = blackwell_measure(bsc_channel(0.1))
    dist, nearest = distance_to_pol(m)
    assert dist == pytest.approx(0.1, abs=1e-12)
    assert nearest.members == (0,)


def test_perturbation_family_monotone():
    h = subgroup_from_members(Z4, [0, 2])
    dh = deterministic_hom(Z4, h)
    uniform_rows = np.full((4, 2), 0.5)
    results = []
    for lam in (0.1, 0.05, 0.01):
        kernel = (1 - lam) * dh.kernel + lam * uniform_rows
        m = blackwell_measure(Channel(kernel, dh.outputs, Z4))
        dist, nearest = distance_to_pol(m)
        gap = capacity_gap(m).value
        assert nearest == h
        results.append((gap, dist))
    gaps, dists = zip(*results)
    assert gaps[0] > gaps[1] > gaps[2]
    assert dists[0] > dists[1] > dists[2]
