from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from loopnet.graph import WeightedGraph, complete_graph, cycle_graph
from loopnet.homology import (
    characteristic_function,
    harmonic_basis,
    harmonic_residual,
    homology_covariance_mc,
    homology_covariance_wick,
    homology_grid_error,
    homology_pmf,
    homology_pmf_table,
    pairing,
)
from loopnet.loops import sample_networks
from loopnet.networks import homology_class


def _triangle_law(alpha, j):
    # the twisted determinant on the unit triangle is 18 - 2 cos(2 pi t)
    f = lambda t: (8 / (9 - math.cos(2 * math.pi * t))) ** alpha * math.cos(2 * math.pi * j * t)
    return quad(f, 0, 1, epsabs=1e-14)[0]


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_triangle_law_against_quadrature(tri, alpha):
    table = homology_pmf_table(tri, alpha, m=64)
    for j in range(-3, 4):
        assert table[(j,)] == pytest.approx(_triangle_law(alpha, j), abs=1e-12)
    assert sum(table.values()) == pytest.approx(1.0, abs=1e-12)


def test_closed_form_at_alpha_one(tri):
    r = 9 - 4 * math.sqrt(5)
    for j in range(4):
        assert homology_pmf(tri, 1.0, [j]) == pytest.approx(2 / math.sqrt(5) * r**j, rel=1e-10)


def test_harmonic_basis_duality(k4, lopsided):
    for g in (k4, lopsided):
        b = harmonic_basis(g)
        assert b.rank == g.cycle_rank
        for i, w in enumerate(b.forms):
            assert harmonic_residual(g, w) < 1e-12
            np.testing.assert_allclose(w, -w.T, atol=1e-14)
            for j, cyc in enumerate(b.cycles):
                assert pairing(cyc, w) == pytest.approx(float(i == j), abs=1e-12)


def test_tree_has_trivial_class():
    g = WeightedGraph(3, ((0, 1, 1.0), (0, 2, 2.0)), (1.0, 0.0, 0.5))
    assert harmonic_basis(g).rank == 0
    assert homology_pmf(g, 1.0, np.zeros((3, 3), int)) == 1.0
    assert homology_pmf_table(g, 1.0) == {(): 1.0}


def test_k4_table_sums_to_one(k4):
    table = homology_pmf_table(k4, 0.5, m=16)
    assert sum(table.values()) == pytest.approx(1.0, abs=1e-9)
    assert homology_grid_error(k4, 0.5, [0, 0, 0], m=16) < 1e-9


def test_grid_aliasing_guard(tri):
    with pytest.raises(ValueError, match="aliases"):
        homology_pmf(tri, 1.0, [8], m=16)


def test_characteristic_function_at_zero_and_half(tri):
    b = harmonic_basis(tri)
    assert characteristic_function(tri, 1.0, b.form_at([0.0])) == pytest.approx(1.0)
    assert characteristic_function(tri, 1.0, b.form_at([0.5])) == pytest.approx(8 / 10)


def test_empirical_law_on_square(rng):
    g = cycle_graph(4, kappa=0.3)
    n = 100_000
    nets = sample_networks(g, 0.5, n, seed=31).networks
    b = harmonic_basis(g)
    coords = b.coordinates(homology_class(nets))[:, 0]
    for j in (-1, 0, 1):
        p = homology_pmf(g, 0.5, [j], basis=b)
        assert abs(np.mean(coords == j) - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_covariance_wick_vs_mc(tri):
    nets = sample_networks(tri, 1.0, 100_000, seed=12).networks
    for e1, e2 in (((0, 1), (0, 1)), ((0, 1), (1, 2)), ((0, 1), (2, 0))):
        exact = homology_covariance_wick(tri, e1, e2)
        est, se = homology_covariance_mc(nets, e1, e2)
        assert abs(est - exact) <= 4 * se
