from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from loopnet.configurations import (
    Configuration,
    ConfigurationError,
    EvenConfiguration,
    config_generating_check,
    configurations_with_counts,
    count_configurations,
    count_configurations_permanent,
    count_even_configurations,
    det_I_minus_sA,
    enumerate_configurations,
    even_generating_check,
    even_multiplicity,
    even_preimage_count,
    hafnian,
    multiplicity,
    preimage_count,
    q_even_probability,
    q_probability,
    sample_configurations,
    sample_even_configurations,
    series_inverse,
    uniform_even_preimage,
    uniform_preimage,
    validate_configuration,
    validate_even_configuration,
)
from loopnet.graph import complete_graph, triangle
from loopnet.loops import DiscreteLoop, loops_network
from loopnet.networks import pmf_eulerian, pmf_even, symmetrize

TRI_CYCLES = [(0, 1), (1, 2), (0, 2), (0, 1, 2), (0, 2, 1)]


def _network(choices, n=3, cycles=TRI_CYCLES):
    return loops_network([DiscreteLoop.from_sequence(cycles[i]) for i in choices], n)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=3))
def test_multiplicity_counts_preimages(choices):
    k = _network(choices)
    assert multiplicity(k) == preimage_count(triangle(), k)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 2), max_size=3))
def test_even_multiplicity_counts_preimages(choices):
    k = symmetrize(_network(choices))
    assert even_multiplicity(k) == even_preimage_count(triangle(), k)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=4), st.integers(0, 2**31))
def test_q_times_multiplicity_is_network_law(choices, seed):
    g = triangle()
    k = _network(choices)
    c = uniform_preimage(k, np.random.default_rng(seed))
    validate_configuration(g, c)
    np.testing.assert_array_equal(c.network(), k)
    assert multiplicity(k) * q_probability(g, c) == pytest.approx(pmf_eulerian(g, k), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=4), st.integers(0, 2**31))
def test_even_q_times_multiplicity_is_network_law(choices, seed):
    g = triangle()
    k = symmetrize(_network(choices))
    c = uniform_even_preimage(k, np.random.default_rng(seed))
    validate_even_configuration(g, c)
    np.testing.assert_array_equal(c.network(), k)
    assert even_multiplicity(k) * q_even_probability(g, c) == pytest.approx(pmf_even(g, k), rel=1e-12)


def test_uniform_preimage_is_uniform(tri):
    k = _network([3, 0, 0])  # (3!)^2 (3!)^2 (1!)^2 / (3! 2!) = 108
    pre = {}
    rng = np.random.default_rng(1)
    n = 108 * 150
    for _ in range(n):
        c = uniform_preimage(k, rng)
        pre[c] = pre.get(c, 0) + 1
    assert len(pre) == multiplicity(k) == 108
    assert chisquare(list(pre.values())).pvalue > 1e-3


def test_q_sums_to_one_over_small_configurations(pair):
    # two vertices: configurations with counts (a, a) number (a!)^2, each Q = 3/4 (1/4)^a / (a!)^2
    total = sum(q_probability(pair, c) for c in enumerate_configurations(pair, [4, 4]))
    assert total == pytest.approx(1 - 0.25**5, rel=1e-12)


@pytest.mark.parametrize("a", range(5))
def test_two_vertex_counts(pair, a):
    assert count_configurations(pair.adjacency, [a, a]) == math.factorial(a) ** 2
    assert count_even_configurations(pair.adjacency, [a, a]) == math.factorial(2 * a)


def test_triangle_counts(tri):
    A = tri.adjacency
    assert count_configurations(A, [1, 1, 1]) == 2  # the two orientations
    assert count_configurations(A, [1, 1, 0]) == 1
    assert count_configurations(A, [2, 0, 0]) == 0
    assert count_configurations_permanent(A, [2, 1, 1]) == count_configurations(A, [2, 1, 1])
    assert sum(1 for _ in configurations_with_counts(tri, [2, 1, 1])) == count_configurations(A, [2, 1, 1])


@pytest.mark.parametrize("method", ["recursion", "permanent", "enumeration"])
def test_generating_function(tri, method):
    caps = [2, 2, 1] if method == "enumeration" else [3, 3, 2]
    counts, coefs = config_generating_check(tri, caps, method)
    assert counts == coefs


@pytest.mark.parametrize("method", ["recursion", "hafnian", "enumeration"])
def test_even_generating_function(tri, method):
    caps = [1, 1, 1] if method == "enumeration" else [2, 2, 2]
    counts, coefs = even_generating_check(tri, caps, 2, method)
    assert counts == coefs


def test_even_generating_function_with_half_scale_disagrees(tri):
    # the scaling s/2 gives non-integer coefficients and is not the count series
    counts, coefs = even_generating_check(tri, [1, 1, 1], Fraction(1, 2))
    assert counts != coefs
    assert any(Fraction(v).denominator > 1 for v in coefs.values())


def test_det_series_of_two_vertex(pair):
    poly = det_I_minus_sA(pair.adjacency)
    assert poly == {(0, 0): 1, (1, 1): -1}
    inv = series_inverse(poly, [3, 3])
    assert inv[(2, 2)] == 1 and inv[(2, 1)] == 0


def test_k4_counts_agree(k4):
    A = k4.adjacency
    for m in ([1, 1, 1, 1], [2, 1, 1, 0], [2, 2, 1, 1]):
        assert count_configurations(A, m) == count_configurations_permanent(A, m)


def test_hafnian_small():
    assert hafnian(np.ones((4, 4))) == 3
    assert hafnian(np.ones((6, 6))) == 15
    assert hafnian(np.ones((3, 3))) == 0.0


def test_validation_errors(tri, pair):
    bad = Configuration((((1, 0),), ((1, 0),), ()))
    with pytest.raises(ConfigurationError):
        validate_configuration(tri, bad)
    with pytest.raises(ConfigurationError):
        validate_configuration(pair, Configuration(((),)))
    with pytest.raises(ConfigurationError):
        validate_even_configuration(pair, EvenConfiguration((((1, 0),), ((0, 0), (0, 0)))))


def test_samplers_follow_network_law(tri):
    n = 20_000
    confs = sample_configurations(tri, n, seed=3)
    empty = sum(c.size == 0 for c in confs) / n
    p = pmf_eulerian(tri, np.zeros((3, 3), int))
    assert abs(empty - p) <= 4 * math.sqrt(p * (1 - p) / n)
    even = sample_even_configurations(tri, n, seed=4)
    p = pmf_even(tri, np.zeros((3, 3), int))
    freq = sum(sum(c.counts) == 0 for c in even) / n
    assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_shift_keeps_network(tri):
    c = uniform_preimage(_network([3, 3, 0]), np.random.default_rng(0))
    s = c.shifted([1, 0, 2])
    np.testing.assert_array_equal(s.network(), c.network())
    validate_configuration(tri, s)
