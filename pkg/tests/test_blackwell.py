import numpy as np
import pytest

from polarlab import (
    BlackwellMeasure,
    Channel,
    JointSource,
    blackwell_measure,
    canonicalize,
    capacity_of_measure,
    deterministic_hom,
    entropy,
    make_group,
    merge_outputs,
    pc_probability,
    subgroup_from_members,
    symmetric_capacity,
)
from polarlab.presets import bsc_channel, identity_channel, random_channel, useless_channel

Z2 = make_group([2])
Z4 = make_group([4])


def test_entropy_values():
    assert entropy(np.array([1.0, 0.0])) == 0.0
    assert entropy(np.full(4, 0.25)) == pytest.approx(2.0, abs=1e-12)
    expected = -(0.9 * np.log2(0.9) + 0.1 * np.log2(0.1))
    assert entropy(np.array([0.9, 0.1])) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        entropy(np.array([0.9, 0.3]))


def test_bsc_measure_atoms():
    m = blackwell_measure(bsc_channel(0.1))
    assert m.atom_count == 2
    assert np.allclose(m.weights, [0.5, 0.5])
    # canonical order sorts by posterior lexicographically
    assert np.allclose(m.posteriors, [[0.1, 0.9], [0.9, 0.1]])


def test_identity_measure_point_masses():
    m = blackwell_measure(identity_channel(Z4))
    assert m.atom_count == 4
    assert np.allclose(m.weights, 0.25)
    assert np.allclose(sorted(m.posteriors.max(axis=1)), 1.0)


def test_quotient_projection_measure():
    h = subgroup_from_members(Z4, [0, 2])
    m = blackwell_measure(deterministic_hom(Z4, h))
    assert m.atom_count == 2
    assert np.allclose(m.weights, 0.5)
    assert np.allclose(m.posteriors, [[0.0, 0.5, 0.0, 0.5], [0.5, 0.0, 0.5, 0.0]])


def test_measure_balance_enforced():
    with pytest.raises(ValueError, match="balanced"):
        BlackwellMeasure(Z2, np.array([1.0]), np.array([[0.9, 0.1]]))


def test_canonicalize_merges_split_outputs():
    w = bsc_channel(0.1)
    split = Channel(
        np.column_stack([w.kernel[:, 0] / 2, w.kernel[:, 0] / 2, w.kernel[:, 1]]),
        ("a", "b", "c"),
        Z2,
    )
    assert blackwell_measure(split).identical(blackwell_measure(w))


def test_canonicalize_idempotent():
    m = blackwell_measure(random_channel(Z4, 6, seed=5))
    again = canonicalize(m)
    assert again.atom_count == m.atom_count
    assert np.allclose(again.posteriors, m.posteriors, atol=1e-14)
    assert np.allclose(again.weights, m.weights, atol=1e-14)


def test_canonicalize_merges_within_tau():
    q = np.array([[0.3, 0.7], [0.3 + 1e-12, 0.7 - 1e-12], [0.7 - 1e-12, 0.3 + 1e-12], [0.7, 0.3]])
    m = BlackwellMeasure(Z2, np.full(4, 0.25), q, merge_tau=1e-9)
    assert m.atom_count == 2
    assert np.allclose(m.weights, 0.5)


def test_zero_probability_outputs_pruned():
    kernel = np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
    m = blackwell_measure(Channel(kernel, group=Z2))
    assert m.atom_count == 1


def test_capacity_of_measure_matches_channel():
    assert capacity_of_measure(blackwell_measure(identity_channel(Z4))) == pytest.approx(2.0)
    assert capacity_of_measure(blackwell_measure(useless_channel(Z4))) == pytest.approx(0.0)
    for seed in range(20):
        w = random_channel(Z4, 5, seed=seed)
        assert capacity_of_measure(blackwell_measure(w)) == pytest.approx(
            symmetric_capacity(w), abs=1e-9
        )


def test_measure_balanced_random():
    for seed in range(20):
        m = blackwell_measure(random_channel(Z4, 6, seed=seed))
        mean = m.weights @ m.posteriors
        assert np.abs(mean - 0.25).max() <= 1e-9


def test_pc_probability_examples():
    diag = JointSource(np.eye(2) / 2, Z2)
    assert pc_probability(diag, bsc_channel(0.1)) == pytest.approx(0.9, abs=1e-12)
    assert pc_probability(diag, identity_channel(Z2)) == pytest.approx(1.0, abs=1e-12)
    assert pc_probability(diag, useless_channel(Z2)) == pytest.approx(0.5, abs=1e-12)


def test_pc_probability_channel_vs_measure_agree():
    rng = np.random.default_rng(3)
    for seed in range(10):
        w = random_channel(Z4, 5, seed=seed)
        m = blackwell_measure(w)
        probs = rng.dirichlet(np.ones(12)).reshape(3, 4)
        src = JointSource(probs, Z4)
        assert pc_probability(src, w) == pytest.approx(pc_probability(src, m), abs=1e-10)


def test_pc_monotone_under_degradation():
    from polarlab import compose

    rng = np.random.default_rng(17)
    w = random_channel(Z4, 5, seed=1)
    v = Channel(rng.dirichlet(np.ones(3), size=5))
    degraded = compose(v, w)
    for t in range(20):
        src_rng = np.random.default_rng([99, t])
        m_u = int(src_rng.integers(1, 5))
        src = JointSource(src_rng.dirichlet(np.ones(m_u * 4)).reshape(m_u, 4), Z4)
        assert pc_probability(src, degraded) <= pc_probability(src, w) + 1e-9


def test_merge_outputs_preserves_equivalence():
    w = bsc_channel(0.1)
    split = Channel(
        np.column_stack([w.kernel[:, 0] / 2, w.kernel[:, 1], w.kernel[:, 0] / 2]),
        ("a", "b", "c"),
        Z2,
    )
    merged = merge_outputs(split)
    assert merged.n_outputs == 2
    assert blackwell_measure(merged).identical(blackwell_measure(w))


def test_realize_round_trips_measure():
    for seed in range(10):
        m = blackwell_measure(random_channel(Z4, 6, seed=seed))
        again = blackwell_measure(m.realize())
        assert again.atom_count == m.atom_count
        assert np.abs(again.posteriors - m.posteriors).max() <= 1e-12
        assert np.abs(again.weights - m.weights).max() <= 1e-12


def test_measure_json_round_trip():
    m = blackwell_measure(bsc_channel(0.1))
    back = BlackwellMeasure.from_json(m.to_json())
    assert back.identical(m)


def test_joint_source_validation():
    with pytest.raises(ValueError, match="mass"):
        JointSource(np.array([[0.5, 0.4]]), Z2)
    with pytest.raises(ValueError, match="column"):
        JointSource(np.array([[0.5, 0.25, 0.25]]), Z2)
