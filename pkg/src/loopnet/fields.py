"""Gaussian free fields and their identities with the loop soup.

The real field has covariance ``G``; the complex field is ``phi = X + iY``
with ``X, Y`` independent real fields, so ``E phi_x conj(phi_y) = 2 G_xy``.
The checks below compare Monte Carlo estimates on the loop side against
closed forms on the field side, which are Gaussian integrals evaluated as
determinants or as explicit Wick sums (:mod:`loopnet.wick`).
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from . import wick
from .graph import WeightedGraph, chol_factor, duality_measure, energy_matrix, green_function, permanent
from .loops import occupation_field, sample_networks
from .networks import symmetrize
from .stats import CheckReport, McEstimate, compare, ks_two_sample, mc_mean, P_THRESHOLD, SE_FACTOR


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_real(g: WeightedGraph, n: int = 1, seed=None) -> np.ndarray:
    """``n`` independent real fields with covariance ``G``, shape ``(n, |X|)``."""
    L = chol_factor(green_function(g))
    z = _rng(seed).standard_normal((n, g.n))
    return z @ L.T


def sample_complex(g: WeightedGraph, n: int = 1, seed=None) -> np.ndarray:
    """``n`` independent complex fields with ``E phi conj(phi) = 2G``."""
    rng = _rng(seed)
    L = chol_factor(green_function(g))
    z = rng.standard_normal((n, g.n)) + 1j * rng.standard_normal((n, g.n))
    return z @ L.T


# -- generating functionals -----------------------------------------------

def _check_edge_support(g, s):
    s = np.asarray(s)
    if s.shape != (g.n, g.n):
        raise ValueError("s must be an |X| x |X| array")
    if np.any(np.abs(s[g.adjacency == 0]) > 0):
        raise ValueError("s must vanish off the edges")
    if np.any(np.abs(s) > 1 + 1e-12):
        raise ValueError("entries of s must have modulus at most 1")
    return s


def field_side_eq1(g: WeightedGraph, s, chi) -> complex:
    """``det(M_lam - C) / det(M_{lam+chi} - C * s)``.

    This is ``E[prod s^N exp(-<chi, L_1>)]`` for the soup at ``alpha = 1``;
    the entry ``s_xy`` marks jumps from ``x`` to ``y``.
    """
    s = _check_edge_support(g, s)
    chi = np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    if np.any(chi < 0):
        raise ValueError("chi must be non-negative")
    lam = duality_measure(g)
    Q = np.diag(lam + chi).astype(complex) - g.conductance * s
    # the loop expansion converges when the dominating kernel is sub-Markovian
    K = g.conductance * np.abs(s) / (lam + chi)[:, None]
    if g.n > 1 and np.max(np.abs(np.linalg.eigvals(K))) >= 1:
        raise ArithmeticError("generating function diverges at this s")
    return complex(np.linalg.det(energy_matrix(g)) / np.linalg.det(Q))


def field_side_eq2(g: WeightedGraph, s, chi) -> float:
    """Square root of :func:`field_side_eq1` for symmetric real ``s``.

    This is ``E[prod_{edges} s^{N_e} exp(-<chi, L_1/2>)]`` at ``alpha = 1/2``
    where ``N_e = N_xy + N_yx`` counts crossings of the unordered edge.
    """
    s = np.asarray(s, dtype=float)
    if not np.allclose(s, s.T):
        raise ValueError("s must be symmetric")
    val = field_side_eq1(g, s, chi)
    return math.sqrt(val.real)


def loop_side_eq1(g: WeightedGraph, s, chi, samples: int, seed=None) -> tuple[McEstimate, McEstimate]:
    """Monte Carlo of ``E[prod s^N exp(-<chi, L_1>)]``, real and imaginary parts."""
    s = _check_edge_support(g, np.asarray(s, dtype=complex))
    rng = _rng(seed)
    batch = sample_networks(g, 1.0, samples, seed=rng)
    vals = _weights(g, batch.networks, s, chi, 1.0, rng)
    return mc_mean(vals.real), mc_mean(vals.imag)


def loop_side_eq2(g: WeightedGraph, s, chi, samples: int, seed=None) -> McEstimate:
    s = np.asarray(s, dtype=float)
    rng = _rng(seed)
    batch = sample_networks(g, 0.5, samples, seed=rng)
    sym = symmetrize(batch.networks)
    iu = np.triu_indices(g.n, 1)
    chi = np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    rho = occupation_field(g, batch.networks, 0.5, rng)
    vals = np.exp(-(rho * chi).sum(axis=1))
    mask = g.adjacency[iu] > 0
    for x, y in zip(iu[0][mask], iu[1][mask]):
        vals = vals * s[x, y] ** sym[:, x, y]
    return mc_mean(vals)


def _weights(g, nets, s, chi, alpha, rng):
    chi = np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    rho = occupation_field(g, nets, alpha, rng)
    vals = np.exp(-(rho * chi).sum(axis=1)).astype(complex)
    for x, y in g.oriented_edges:
        vals = vals * s[x, y] ** nets[:, x, y]
    return vals


def identity_eq1_check(g: WeightedGraph, s, chi, samples: int = 100_000, seed=None) -> CheckReport:
    re, im = loop_side_eq1(g, s, chi, samples, seed)
    rhs = field_side_eq1(g, s, chi)
    ok = re.within(rhs.real) and im.within(rhs.imag)
    return CheckReport(
        "complex generating functional", re.mean, rhs.real, re.se, ok,
        {"lhs_imag": im.mean, "rhs_imag": rhs.imag, "se_imag": im.se, "samples": samples},
    )


def identity_eq2_check(g: WeightedGraph, s, chi, samples: int = 100_000, seed=None) -> CheckReport:
    est = loop_side_eq2(g, s, chi, samples, seed)
    return compare("real generating functional", est, field_side_eq2(g, s, chi), samples=samples)


# -- moment identities ----------------------------------------------------

def moment_identity_check(
    g: WeightedGraph,
    edges: Sequence[tuple[int, int]],
    vertices: Sequence[int] = (),
    samples: int = 100_000,
    seed=None,
    even: bool = False,
) -> CheckReport:
    """Compare a jump-count moment with its Gaussian counterpart.

    Complex case (``even=False``, soup at ``alpha = 1``):
    ``E[prod N_{x_i y_i} prod (N_z + 1)]`` against
    ``E[prod (C/2) phi_x conj(phi_y) prod (lam_z/2) |phi_z|^2]``.
    Real case (``even=True``, ``alpha = 1/2``, edges unordered):
    ``E[prod N_{x_i y_i} prod (N_z + 1/2)]`` against
    ``E[prod C phi_x phi_y prod (lam_z/2) phi_z^2]``.
    Edges and vertices must be distinct.
    """
    keys = [tuple(sorted(e)) for e in edges] if even else [tuple(e) for e in edges]
    if len(set(keys)) != len(keys) or len(set(vertices)) != len(vertices):
        raise ValueError("edges and vertices must be distinct")
    alpha = 0.5 if even else 1.0
    batch = sample_networks(g, alpha, samples, seed=seed)
    nets = symmetrize(batch.networks) if even else batch.networks
    totals = batch.networks.sum(axis=2)
    vals = np.ones(samples)
    for x, y in edges:
        vals = vals * nets[:, x, y]
    for z in vertices:
        vals = vals * (totals[:, z] + alpha)
    if even:
        rhs = wick.even_jump_moment(g, edges, vertices)
    else:
        rhs = wick.jump_moment(g, edges, vertices)
    return compare("real moment identity" if even else "complex moment identity", mc_mean(vals), rhs, samples=samples)


# -- determinant / permanent ----------------------------------------------

def _cycles(perm):
    seen = set()
    out = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        out.append(cyc)
    return out


def det_perm_rhs(g: WeightedGraph, chi=None) -> float:
    """``det(M_chi - C) Per(G)``."""
    chi = duality_measure(g) if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    return float(np.linalg.det(np.diag(chi) - g.conductance) * permanent(green_function(g)))


def det_perm_even_rhs(g: WeightedGraph, chi=None) -> float:
    """``det(M_chi - C) E[prod_x (phi^R_x)^2]`` by Isserlis pairings."""
    chi = duality_measure(g) if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    G = green_function(g)
    return float(np.linalg.det(np.diag(chi) - g.conductance) * wick.squared_field_product(G, range(g.n), False))


def det_perm_statistic(g: WeightedGraph, nets: np.ndarray, chi=None) -> np.ndarray:
    """``det(M_{chi/lam} D_N - N)`` per network, ``D_N = diag(1 + N_x)``.

    Expanding the determinant over permutations and taking expectations
    termwise with the complex moment identity turns every fixed point into
    ``chi_x |phi_x|^2 / 2`` and every cycle into ``-C phi conj(phi) / 2``
    factors, which reassemble into ``det(M_chi - C) Per(G)``.
    """
    lam = duality_measure(g)
    chi = lam if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    nets = np.asarray(nets, dtype=float)
    D = 1.0 + nets.sum(axis=-1)
    A = -nets.copy()
    idx = np.arange(g.n)
    A[..., idx, idx] = (chi / lam) * D
    return np.linalg.det(A)


def det_perm_even_statistic(g: WeightedGraph, nets: np.ndarray, chi=None) -> np.ndarray:
    """Even counterpart of :func:`det_perm_statistic` for ``alpha = 1/2`` networks.

    ``nets`` are oriented networks of the ``alpha = 1/2`` soup.  The sum runs
    over permutations with fixed points weighted ``(2 chi_x / lam_x)(N_x + 1/2)``,
    transpositions ``(x y)`` weighted by the falling factorial
    ``N_e (N_e - 1)`` of the unordered crossing count and longer cycles by
    ``prod -N_e``.  Its mean is ``det(M_chi - C) E[prod (phi^R_x)^2]``.
    """
    lam = duality_measure(g)
    chi = lam if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    nets = np.asarray(nets)
    sym = symmetrize(nets).astype(float)
    tot = nets.sum(axis=-1).astype(float)
    out = np.zeros(nets.shape[:-2])
    for perm in itertools.permutations(range(g.n)):
        cycles = _cycles(perm)
        sign = (-1) ** sum(len(c) - 1 for c in cycles)
        term = np.full(nets.shape[:-2], float(sign))
        for c in cycles:
            if len(c) == 1:
                z = c[0]
                term = term * (2 * chi[z] / lam[z]) * (tot[..., z] + 0.5)
            elif len(c) == 2:
                x, y = c
                term = term * sym[..., x, y] * (sym[..., x, y] - 1)
            else:
                for i, x in enumerate(c):
                    term = term * -sym[..., x, c[(i + 1) % len(c)]]
        out = out + term
    return out


def det_perm_literal_statistic(g: WeightedGraph, nets: np.ndarray, chi=None) -> np.ndarray:
    """``det(M_chi D_N - N)`` without the ``1/lam`` normalisation.

    Its mean does not equal ``det(M_chi - C) Per(G)``; it is kept so reports
    can show the size of the discrepancy.
    """
    lam = duality_measure(g)
    chi = lam if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    return det_perm_statistic(g, nets, chi * lam)


def det_perm_identity_check(g: WeightedGraph, chi=None, samples: int = 100_000, seed=None, even: bool = False) -> CheckReport:
    if g.n > 6:
        raise ValueError("determinant/permanent check limited to 6 vertices")
    lam = duality_measure(g)
    chi_v = lam if chi is None else np.broadcast_to(np.asarray(chi, dtype=float), (g.n,))
    if np.any(chi_v < lam - 1e-12):
        raise ValueError("chi must dominate lam")
    if even:
        batch = sample_networks(g, 0.5, samples, seed=seed)
        est = mc_mean(det_perm_even_statistic(g, batch.networks, chi_v))
        return compare("even determinant identity", est, det_perm_even_rhs(g, chi_v), samples=samples)
    batch = sample_networks(g, 1.0, samples, seed=seed)
    est = mc_mean(det_perm_statistic(g, batch.networks, chi_v))
    literal = float(det_perm_literal_statistic(g, batch.networks, chi_v).mean())
    return compare("determinant/permanent identity", est, det_perm_rhs(g, chi_v), samples=samples, unnormalised_lhs=literal)


# -- isomorphism ----------------------------------------------------------

def isomorphism_check(g: WeightedGraph, samples: int = 100_000, seed=None, pair: tuple[int, int] = (0, 1)) -> list[CheckReport]:
    """Occupation fields against half squared free fields.

    For every vertex a two-sample KS test compares ``L_1`` with ``|phi|^2/2``
    and ``L_1/2`` with ``(phi^R)^2/2``.  For the vertex pair, the mixed
    second moment of the occupation field is compared with its Wick value.
    """
    rng = _rng(seed)
    out = []
    G = green_function(g)
    for alpha, complex_field in ((1.0, True), (0.5, False)):
        nets = sample_networks(g, alpha, samples, seed=rng).networks
        occ = occupation_field(g, nets, alpha, rng)
        phi = sample_complex(g, samples, rng) if complex_field else sample_real(g, samples, rng)
        sq = np.abs(phi) ** 2 / 2
        label = "complex" if complex_field else "real"
        for x in range(g.n):
            stat, p = ks_two_sample(occ[:, x], sq[:, x])
            out.append(CheckReport(f"occupation vs {label} field, vertex {x}", stat, 0.0, 0.0, p > P_THRESHOLD, {"p_value": p}))
        if g.n >= 2:
            x, y = pair
            if complex_field:
                exact = wick.complex_moment(G, [x, y], [x, y]) / 4
            else:
                exact = wick.real_moment(G, [x, x, y, y]) / 4
            out.append(compare(f"mixed moment {label} ({x},{y})", mc_mean(occ[:, x] * occ[:, y]), exact))
            out.append(compare(f"field mixed moment {label} ({x},{y})", mc_mean(sq[:, x] * sq[:, y]), exact))
    return out


__all__ = [
    "sample_real", "sample_complex", "field_side_eq1", "field_side_eq2", "loop_side_eq1", "loop_side_eq2",
    "identity_eq1_check", "identity_eq2_check", "moment_identity_check", "det_perm_rhs", "det_perm_even_rhs",
    "det_perm_statistic", "det_perm_even_statistic", "det_perm_literal_statistic", "det_perm_identity_check",
    "isomorphism_check", "SE_FACTOR",
]
