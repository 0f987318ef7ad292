from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopnet.graph import green_function, log_det_I_minus_P, transition_matrix
from loopnet.loops import (
    DiscreteLoop,
    based_loops_from_exits,
    canonical_rotation,
    crp_partition,
    default_kmax,
    eppf_split,
    expected_loop_count,
    first_vertex_free_probability,
    loop_length_masses,
    loop_multiplicity,
    loops_network,
    occupation_field,
    sample_ensembles,
    sample_networks,
    tail_bound,
    wilson_networks,
    wilson_sample,
)


def _closed_walk_mass(P, k):
    # sum over all vertex sequences of length k of the cyclic product
    n = len(P)
    total = 0.0
    for seq in itertools.product(range(n), repeat=k):
        total += math.prod(P[seq[i], seq[(i + 1) % k]] for i in range(k))
    return total / k


def test_loop_masses_against_walk_enumeration(lopsided):
    P = transition_matrix(lopsided)
    m, tail = loop_length_masses(lopsided, 6)
    expect = [_closed_walk_mass(P, k) for k in range(2, 7)]
    np.testing.assert_allclose(m, expect, rtol=1e-12)
    assert tail >= 0


def test_masses_sum_to_minus_log_det(tri):
    kmax = default_kmax(tri, 1e-12)
    m, tail = loop_length_masses(tri, kmax)
    assert m.sum() == pytest.approx(-log_det_I_minus_P(tri), abs=1e-11)
    assert tail_bound(tri, kmax) <= 1e-12


def test_canonical_rotation_and_multiplicity():
    assert canonical_rotation([2, 0, 1]) == (0, 1, 2)
    assert loop_multiplicity((0, 1, 0, 1)) == 2
    assert loop_multiplicity((0, 1, 2)) == 1
    assert DiscreteLoop.from_sequence([1, 0]).vertices == (0, 1)
    with pytest.raises(ValueError):
        DiscreteLoop.from_sequence([0])


@given(st.lists(st.integers(0, 3), min_size=2, max_size=10), st.integers(0, 9))
def test_rotation_invariance(seq, r):
    r %= len(seq)
    assert canonical_rotation(seq) == canonical_rotation(seq[r:] + seq[:r])
    assert canonical_rotation(canonical_rotation(seq)) == canonical_rotation(seq)


def test_sampling_is_reproducible(tri):
    a = sample_networks(tri, 1.0, 500, seed=3)
    b = sample_networks(tri, 1.0, 500, seed=3)
    np.testing.assert_array_equal(a.networks, b.networks)
    np.testing.assert_array_equal(a.loop_counts, b.loop_counts)


def test_chunking_does_not_change_laws(tri):
    a = sample_networks(tri, 1.0, 40_000, seed=1, chunk=7_000).networks
    assert a.shape == (40_000, 3, 3)
    assert np.all(a.sum(axis=1) == a.sum(axis=2))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_mean_jump_counts(lopsided, alpha):
    n = 60_000
    b = sample_networks(lopsided, alpha, n, seed=11)
    mean = b.networks.mean(axis=0)
    se = b.networks.std(axis=0) / math.sqrt(n)
    expect = alpha * lopsided.conductance * green_function(lopsided)
    assert np.all(np.abs(mean - expect) <= 4 * se + 1e-12)
    cnt = b.loop_counts
    assert abs(cnt.mean() - expected_loop_count(lopsided, alpha)) <= 4 * cnt.std() / math.sqrt(n)


def test_ensembles_match_their_networks(tri):
    ens = sample_ensembles(tri, 1.0, 50, seed=5)
    for e in ens:
        k = e.network()
        np.testing.assert_array_equal(k, loops_network(e.loops, 3))
        assert np.all(k.sum(0) == k.sum(1))


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_occupation_field_mean(path3, alpha):
    nets = sample_networks(path3, alpha, 50_000, seed=2).networks
    rho = occupation_field(path3, nets, alpha, seed=4)
    G = np.diag(green_function(path3))
    se = rho.std(axis=0) / math.sqrt(len(rho))
    assert np.all(np.abs(rho.mean(axis=0) - alpha * G) <= 4 * se)


def test_occupation_field_rejects_other_alpha(tri):
    with pytest.raises(ValueError):
        occupation_field(tri, np.zeros((3, 3)), 2.0)


def test_wilson_exits_rebuild_based_loops(k4):
    rng = np.random.default_rng(8)
    for _ in range(200):
        based, exits = wilson_sample(k4, seed=rng)
        assert based_loops_from_exits(exits) == based


def test_wilson_mean_network_and_free_vertex(tri):
    n = 40_000
    nets = wilson_networks(tri, n, seed=9, vertex_order=[2, 0, 1])
    mean = nets.mean(axis=0)
    se = nets.std(axis=0) / math.sqrt(n)
    expect = tri.conductance * green_function(tri)
    assert np.all(np.abs(mean - expect) <= 4 * se + 1e-12)
    free = np.mean(nets[:, 0, :].sum(axis=1) == 0)
    p = first_vertex_free_probability(tri, 0)
    assert abs(free - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_eppf_split_preserves_steps():
    path = (0, 1, 0, 2, 1, 0, 1)
    loops = eppf_split(path, seed=3)
    np.testing.assert_array_equal(loops_network(loops, 3), loops_network([DiscreteLoop.from_sequence(path)], 3))


def test_crp_single_table_frequency():
    rng = np.random.default_rng(0)
    n = 30_000
    hits = sum(len(crp_partition(3, rng)) == 1 for _ in range(n))
    # P(one block of three) = 2!/3!
    assert abs(hits / n - 1 / 3) <= 4 * math.sqrt(2 / 9 / n)
