from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from loopnet.configurations import Configuration, sample_configurations, uniform_preimage
from loopnet.graph import complete_graph
from loopnet.loops import DiscreteLoop, loops_network
from loopnet.maps import (
    build_map,
    complete_graph_essential_vertices,
    complete_graph_expected_chi,
    euler_characteristic,
    expected_chi,
    expected_essential_vertices,
    face_sets,
    genus_per_component,
    map_report_json,
    occupied_vertex_expectation,
    same_map,
    solve_u,
)

K4_CYCLES = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 1, 2), (0, 2, 1), (0, 1, 2, 3), (0, 3, 1, 2), (1, 3)]


def _random_configuration(choices, seed):
    k = loops_network([DiscreteLoop.from_sequence(K4_CYCLES[i]) for i in choices], 4)
    return uniform_preimage(k, np.random.default_rng(seed))


def test_single_back_and_forth_is_a_sphere():
    c = Configuration((((1, 0),), ((0, 0),)))
    fs = face_sets(c)
    assert fs.plus == ((0, 1),) and fs.minus == ((0, 1),)
    assert euler_characteristic(c) == 2
    assert genus_per_component(c) == [0]


def test_doubled_edge_can_be_a_torus():
    # two exits at 0 coupled to the entries of 1 crosswise
    crossed = Configuration((((1, 1), (1, 0)), ((0, 0), (0, 1))))
    straight = Configuration((((1, 0), (1, 1)), ((0, 0), (0, 1))))
    chis = sorted([euler_characteristic(crossed), euler_characteristic(straight)])
    assert chis[1] == 2
    assert all(g >= 0 for c in (crossed, straight) for g in genus_per_component(c))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, len(K4_CYCLES) - 1), min_size=1, max_size=4), st.integers(0, 2**31))
def test_map_invariants(choices, seed):
    c = _random_configuration(choices, seed)
    k = c.network()
    fs = face_sets(c)
    np.testing.assert_array_equal(fs.network_plus(4), k)
    np.testing.assert_array_equal(fs.network_minus(4), k.T)
    genera = genus_per_component(c)
    assert all(g >= 0 for g in genera)
    assert euler_characteristic(c) == sum(2 - 2 * g for g in genera)
    m = build_map(c)
    assert sorted(sum(m.faces(), [])) == list(range(m.n_darts))
    assert all(m.involution[m.involution[d]] == d for d in range(m.n_darts))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, len(K4_CYCLES) - 1), min_size=1, max_size=4), st.integers(0, 2**31))
def test_enter_first_is_exit_first_with_entries_shifted(choices, seed):
    c = _random_configuration(choices, seed)
    shifted = c.shifted([0] * 4, [-1] * 4)
    assert same_map(build_map(c, exit_first=False), build_map(shifted, exit_first=True))
    assert euler_characteristic(c, exit_first=False) == euler_characteristic(shifted)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, len(K4_CYCLES) - 1), min_size=1, max_size=4), st.integers(0, 2**31), st.lists(st.integers(0, 5), min_size=4, max_size=4))
def test_common_shift_gives_the_same_map(choices, seed, r):
    c = _random_configuration(choices, seed)
    assert same_map(build_map(c), build_map(c.shifted(r)))
    assert map_report_json(c) == map_report_json(c) and euler_characteristic(c) == euler_characteristic(c.shifted(r))


def test_same_map_detects_difference():
    crossed = Configuration((((1, 1), (1, 0)), ((0, 0), (0, 1))))
    straight = Configuration((((1, 0), (1, 1)), ((0, 0), (0, 1))))
    if euler_characteristic(crossed) != euler_characteristic(straight):
        assert not same_map(build_map(crossed), build_map(straight))


def test_report_json_is_stable():
    c = Configuration((((1, 0),), ((0, 0),)))
    rep = json.loads(map_report_json(c))
    assert rep == {"chi": 2, "faces_minus": [[0, 1]], "faces_plus": [[0, 1]], "genus_per_component": [0]}


@pytest.mark.parametrize("d", range(2, 7))
@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_complete_graph_closed_forms(d, kappa):
    g = complete_graph(d, kappa)
    assert expected_chi(g) == pytest.approx(complete_graph_expected_chi(d, kappa), rel=1e-12)
    assert expected_essential_vertices(g) == pytest.approx(complete_graph_essential_vertices(d, kappa), rel=1e-12)


def test_chi_and_vertex_counts_mc(tri):
    n = 20_000
    confs = sample_configurations(tri, n, seed=17)
    chi = np.array([euler_characteristic(c) for c in confs], dtype=float)
    assert abs(chi.mean() - expected_chi(tri)) <= 4 * chi.std() / math.sqrt(n)
    occ = np.array([sum(1 for t in c.counts if t > 0) for c in confs], dtype=float)
    assert abs(occ.mean() - occupied_vertex_expectation(tri)) <= 4 * occ.std() / math.sqrt(n)
    ess = np.array([sum(1 for t in c.counts if t > 1) for c in confs], dtype=float)
    assert abs(ess.mean() - expected_essential_vertices(tri)) <= 4 * ess.std() / math.sqrt(n)


def test_solve_u():
    d = math.exp(5)
    u, kappa = solve_u(d, 0.0)
    assert u == pytest.approx(6.936847407220219, rel=1e-12)
    assert u == pytest.approx(brentq(lambda t: t - math.log(t) - 5, 1, 50, xtol=1e-14), rel=1e-12)
    assert kappa == pytest.approx(math.sqrt(d / u))
    assert solve_u(math.e, 0.0) == (1.0, math.sqrt(math.e))
    with pytest.raises(ValueError):
        solve_u(2.0, 0.0)


def test_convention_flip_preserves_chi_law_not_samples(tri):
    # over all configurations with fixed counts the two conventions give the
    # same multiset of chi, although individual configurations may differ
    from loopnet.configurations import configurations_with_counts

    exit_first, enter_first, differ = [], [], 0
    for c in configurations_with_counts(tri, [3, 2, 2]):
        a, b = euler_characteristic(c), euler_characteristic(c, exit_first=False)
        exit_first.append(a)
        enter_first.append(b)
        differ += a != b
    assert sorted(exit_first) == sorted(enter_first)
    assert differ > 0
