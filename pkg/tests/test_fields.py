from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopnet.fields import (
    det_perm_even_rhs,
    det_perm_even_statistic,
    det_perm_identity_check,
    det_perm_literal_statistic,
    det_perm_rhs,
    det_perm_statistic,
    field_side_eq1,
    field_side_eq2,
    identity_eq1_check,
    identity_eq2_check,
    isomorphism_check,
    moment_identity_check,
    sample_complex,
    sample_real,
)
from loopnet.graph import green_function, single_vertex
from loopnet.networks import enumerate_eulerian, enumerate_even, pmf_eulerian, pmf_even
from loopnet.wick import complex_moment, even_jump_moment, jump_moment, real_moment


def _pair_exact_mean(stat, g, max_total=80):
    # exact expectation over the two-vertex network law
    return sum(pmf_eulerian(g, k) * float(stat(g, k[None])[0]) for k in enumerate_eulerian(g, max_total))


def _pair_even_exact_mean(stat, g, max_total=120):
    # on two vertices the oriented alpha = 1/2 network is k_e/2 each way
    return sum(pmf_even(g, k) * float(stat(g, (k // 2)[None])[0]) for k in enumerate_even(g, max_total))


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_two_vertex_generating_function(a, b):
    from loopnet.graph import two_vertex

    g = two_vertex()
    s = np.array([[0, a], [b, 0]])
    assert field_side_eq1(g, s, 0.0) == pytest.approx(3 / (4 - a * b), rel=1e-12)


def test_field_side_with_chi(pair):
    s = np.array([[0, 0.5], [0.5, 0]])
    assert field_side_eq1(pair, s, [1.0, 0.0]) == pytest.approx(3 / (6 - 0.25))
    assert field_side_eq2(pair, s, [1.0, 0.0]) == pytest.approx(math.sqrt(3 / 5.75))


def test_field_side_input_checks(pair):
    with pytest.raises(ValueError, match="modulus"):
        field_side_eq1(pair, np.array([[0, 2.0], [0, 0]]), 0.0)
    with pytest.raises(ValueError, match="off the edges"):
        field_side_eq1(pair, np.array([[0.5, 0], [0, 0]]), 0.0)
    with pytest.raises(ValueError, match="symmetric"):
        field_side_eq2(pair, np.array([[0, 0.5], [0.2, 0]]), 0.0)


def test_wick_small_cases():
    G = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert complex_moment(G, [0], [0]) == 4.0
    assert complex_moment(G, [0, 1], [0, 1]) == pytest.approx(4 * (2 * 3 + 1 * 1))
    assert complex_moment(G, [0], [0, 1]) == 0.0
    assert real_moment(G, [0, 0, 0, 0]) == pytest.approx(3 * 4.0)
    assert real_moment(G, [0, 0, 1, 1]) == pytest.approx(2 * 3 + 2 * 1)
    assert real_moment(G, [0, 1, 1]) == 0.0


def test_field_samplers_covariance(lopsided):
    n = 200_000
    G = green_function(lopsided)
    phi = sample_real(lopsided, n, seed=1)
    np.testing.assert_allclose(np.cov(phi.T), G, atol=0.03)
    z = sample_complex(lopsided, n, seed=2)
    np.testing.assert_allclose((z[:, :, None] * z.conj()[:, None, :]).mean(axis=0).real, 2 * G, atol=0.06)


def test_jump_moment_first_order(pair):
    # E N_01 = C_01 G_01 and E (N_0 + 1) = lam_0 G_00
    assert jump_moment(pair, [(0, 1)]) == pytest.approx(1 / 3)
    assert jump_moment(pair, [], [0]) == pytest.approx(4 / 3)
    assert even_jump_moment(pair, [(0, 1)]) == pytest.approx(1 / 3)


def test_moment_identities_exactly_on_pair(pair):
    # E[N_01 (N_0 + 1)] by summing the exact network law
    exact = sum(pmf_eulerian(pair, k) * k[0, 1] * (k[0].sum() + 1) for k in enumerate_eulerian(pair, 120))
    assert jump_moment(pair, [(0, 1)], [0]) == pytest.approx(exact, rel=1e-10)
    # alpha = 1/2: E[N_{0,1} (N_1 + 1/2)] with N_1 = N_{0,1}/2
    exact_even = sum(pmf_even(pair, k) * k[0, 1] * (k[0, 1] / 2 + 0.5) for k in enumerate_even(pair, 200))
    assert even_jump_moment(pair, [(0, 1)], [1]) == pytest.approx(exact_even, rel=1e-10)


@pytest.mark.parametrize("even", [False, True])
def test_moment_identity_check(tri, even):
    rep = moment_identity_check(tri, [(0, 1), (1, 2)], [2], samples=100_000, seed=4, even=even)
    assert rep.passed, rep.to_dict()


def test_moment_identity_rejects_repeats(tri):
    with pytest.raises(ValueError):
        moment_identity_check(tri, [(0, 1), (1, 0)], samples=10, even=True)


def test_generating_identities_mc(tri):
    rng = np.random.default_rng(5)
    s = np.zeros((3, 3), dtype=complex)
    for x, y in tri.oriented_edges:
        s[x, y] = 0.8 * np.exp(1j * rng.uniform(0, 2 * np.pi))
    assert identity_eq1_check(tri, s, [0.3, 0.0, 1.2], samples=100_000, seed=6).passed
    sr = np.where(tri.adjacency > 0, 0.6, 0.0)
    assert identity_eq2_check(tri, sr, [0.5, 0.5, 0.0], samples=100_000, seed=7).passed


def test_det_perm_exact_on_pair(pair):
    for chi in (None, np.array([2.5, 3.0])):
        lhs = _pair_exact_mean(lambda g, n: det_perm_statistic(g, n, chi), pair)
        assert lhs == pytest.approx(det_perm_rhs(pair, chi), rel=1e-10)
        lhs_even = _pair_even_exact_mean(lambda g, n: det_perm_even_statistic(g, n, chi), pair)
        assert lhs_even == pytest.approx(det_perm_even_rhs(pair, chi), rel=1e-10)


def test_det_perm_literal_form_fails(pair):
    # without the 1/lam normalisation the identity is off by a large factor
    chi = np.array([2.5, 3.0])
    lhs = _pair_exact_mean(lambda g, n: det_perm_literal_statistic(g, n, chi), pair)
    assert abs(lhs - det_perm_rhs(pair, chi)) > 1.0


def test_det_perm_single_vertex():
    g = single_vertex(2.0)
    nets = np.zeros((3, 1, 1), dtype=np.int64)
    np.testing.assert_allclose(det_perm_statistic(g, nets, [5.0]), 2.5)
    assert det_perm_rhs(g, [5.0]) == pytest.approx(2.5)


@pytest.mark.parametrize("even", [False, True])
def test_det_perm_mc(tri, even):
    rep = det_perm_identity_check(tri, chi=[3.0, 3.5, 4.0], samples=100_000, seed=9, even=even)
    assert rep.passed, rep.to_dict()


def test_det_perm_chi_domination(tri):
    with pytest.raises(ValueError):
        det_perm_identity_check(tri, chi=[1.0, 3.0, 3.0], samples=10)


def test_isomorphism(path3):
    reps = isomorphism_check(path3, samples=50_000, seed=3)
    assert all(r.passed for r in reps), [r.to_dict() for r in reps if not r.passed]
