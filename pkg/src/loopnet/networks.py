"""Exact laws of the random Eulerian and even networks, flows and homology.

Networks are ``n x n`` integer arrays with zero diagonal, supported on the
oriented edges of the graph.  Even networks are symmetric arrays holding
``k_{x,y}`` on both ``[x, y]`` and ``[y, x]``.  All probabilities are
assembled in log space and exponentiated last.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.special import gammaln

from .graph import (
    WeightedGraph,
    duality_measure,
    log_det_I_minus_P,
    transition_matrix,
)


class NetworkError(ValueError):
    pass


# -- validation -------------------------------------------------------------

def _as_network(g, k):
    k = np.asarray(k)
    if k.shape != (g.n, g.n):
        raise NetworkError(f"network has shape {k.shape}, expected {(g.n, g.n)}")
    if np.any(k < 0) or np.any(k != np.round(k)):
        raise NetworkError("network entries must be non-negative integers")
    k = k.astype(np.int64)
    if np.any(k[g.adjacency == 0] != 0):
        raise NetworkError("network is supported off the oriented edges")
    return k


def is_eulerian(k) -> bool:
    k = np.asarray(k)
    return bool(np.array_equal(k.sum(axis=-1), k.sum(axis=-2)))


def vertex_totals(k) -> np.ndarray:
    """``k_x = sum_y k_xy`` for an Eulerian network."""
    return np.asarray(k).sum(axis=-1)


def even_totals(k) -> np.ndarray:
    """``k_x = (1/2) sum_y k_{x,y}`` for an even network (symmetric array)."""
    s = np.asarray(k).sum(axis=-1)
    return s // 2


def is_even(k) -> bool:
    k = np.asarray(k)
    return bool(np.array_equal(k, np.swapaxes(k, -1, -2)) and np.all(k.sum(axis=-1) % 2 == 0))


def symmetrize(N) -> np.ndarray:
    """``N_{x,y} = N_xy + N_yx`` stored symmetrically."""
    N = np.asarray(N)
    return N + np.swapaxes(N, -1, -2)


# -- point masses -------------------------------------------------------------

def log_pmf_eulerian(g: WeightedGraph, k) -> float:
    k = _as_network(g, k)
    if not is_eulerian(k):
        raise NetworkError("network is not Eulerian")
    P = transition_matrix(g)
    kx = vertex_totals(k)
    mask = k > 0
    out = log_det_I_minus_P(g)
    out += gammaln(kx + 1).sum() - gammaln(k[mask] + 1).sum()
    out += (k[mask] * np.log(P[mask])).sum()
    return float(out)


def pmf_eulerian(g: WeightedGraph, k) -> float:
    """``P(N^(1) = k)`` for an Eulerian network ``k``."""
    return math.exp(log_pmf_eulerian(g, k))


def _edge_log_weights(g):
    # log sqrt(P_xy P_yx) = log C_xy - (log lam_x + log lam_y) / 2
    lam = duality_measure(g)
    C = g.conductance
    with np.errstate(divide="ignore"):
        return np.log(C) - 0.5 * (np.log(lam)[:, None] + np.log(lam)[None, :])


def log_pmf_even(g: WeightedGraph, k) -> float:
    k = _as_network(g, k)
    if not is_even(k):
        raise NetworkError("network is not even")
    kx = even_totals(k)
    iu = np.triu_indices(g.n, 1)
    ke = k[iu]
    mask = ke > 0
    W = _edge_log_weights(g)[iu]
    out = 0.5 * log_det_I_minus_P(g)
    out += (gammaln(2 * kx + 1) - kx * math.log(2) - gammaln(kx + 1)).sum()
    out -= gammaln(ke[mask] + 1).sum()
    out += (ke[mask] * W[mask]).sum()
    return float(out)


def pmf_even(g: WeightedGraph, k) -> float:
    """``P(N^(1/2)_{.} = k)`` for an even network given as a symmetric array.

    The edge weight used for each unordered edge is
    ``sqrt(P_xy P_yx) = C_xy / sqrt(lam_x lam_y)``, which is what makes the
    law sum to one on graphs with non-constant ``lam``.
    """
    return math.exp(log_pmf_even(g, k))


def joint_density_eulerian(g: WeightedGraph, k, rho) -> float:
    """Joint density of ``(N^(1), occupation field)`` at ``(k, rho)``."""
    k = _as_network(g, k)
    if not is_eulerian(k):
        raise NetworkError("network is not Eulerian")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    lam = duality_measure(g)
    C = g.conductance
    out = log_det_I_minus_P(g) + np.log(lam).sum() - (lam * rho).sum()
    for x, y in zip(*np.nonzero(k)):
        base = math.sqrt(rho[x] * rho[y]) * C[x, y]
        if base == 0.0:
            return 0.0
        out += k[x, y] * math.log(base) - math.lgamma(k[x, y] + 1)
    return math.exp(out)


def joint_density_even(g: WeightedGraph, k, rho) -> float:
    """Joint density of an even network and the doubled occupation field.

    ``rho`` is on the scale of ``2 * occupation_field(alpha=1/2)``: given
    ``k`` its coordinates are independent ``Gamma(k_x + 1/2, rate lam_x/2)``.
    Use :func:`joint_density_even_occupation` for the occupation field itself.
    """
    k = _as_network(g, k)
    if not is_even(k):
        raise NetworkError("network is not even")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    lam = duality_measure(g)
    C = g.conductance
    out = 0.5 * log_det_I_minus_P(g)
    out += (0.5 * np.log(lam / (2 * np.pi * rho)) - lam * rho / 2).sum()
    for x, y in zip(*np.triu_indices(g.n, 1)):
        ke = k[x, y]
        if ke:
            out += ke * math.log(math.sqrt(rho[x] * rho[y]) * C[x, y]) - math.lgamma(ke + 1)
    return math.exp(out)


def joint_density_even_occupation(g: WeightedGraph, k, rho) -> float:
    """Joint density of ``(N^(1/2)_{.}, occupation field at alpha=1/2)``."""
    rho = np.asarray(rho, dtype=float)
    return 2.0 ** g.n * joint_density_even(g, k, 2 * rho)


# -- enumeration ----------------------------------------------------------

def _compositions(slots, budget):
    """Integer vectors of length ``slots`` with sum <= budget, lexicographic."""
    if slots == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _compositions(slots - 1, budget - first):
            yield (first,) + rest


def enumerate_eulerian(g: WeightedGraph, max_total: int) -> Iterator[np.ndarray]:
    """Eulerian networks with ``sum_{x,y} k_xy <= max_total``.

    Order is lexicographic in the counts on ``g.oriented_edges``.
    """
    edges = g.oriented_edges
    src = np.array([e[0] for e in edges])
    dst = np.array([e[1] for e in edges])
    for vec in _compositions(len(edges), max_total):
        v = np.array(vec, dtype=np.int64)
        if np.array_equal(np.bincount(src, v, g.n), np.bincount(dst, v, g.n)):
            k = np.zeros((g.n, g.n), dtype=np.int64)
            k[src, dst] = v
            yield k


def enumerate_even(g: WeightedGraph, max_total: int) -> Iterator[np.ndarray]:
    """Even networks with ``sum_e k_e <= max_total`` as symmetric arrays."""
    edges = g.unordered_edges
    a = np.array([e[0] for e in edges], dtype=int)
    b = np.array([e[1] for e in edges], dtype=int)
    for vec in _compositions(len(edges), max_total):
        v = np.array(vec, dtype=np.int64)
        deg = np.bincount(a, v, g.n) + np.bincount(b, v, g.n)
        if np.all(deg % 2 == 0):
            k = np.zeros((g.n, g.n), dtype=np.int64)
            k[a, b] = v
            k[b, a] = v
            yield k


def network_key(k) -> tuple[int, ...]:
    return tuple(int(v) for v in np.asarray(k).ravel())


# -- homology and flows -----------------------------------------------------

def homology_class(k) -> np.ndarray:
    """Antisymmetric part ``k - k^T``."""
    k = np.asarray(k)
    return k - np.swapaxes(k, -1, -2)


def flow_of(h) -> np.ndarray:
    """Flow ``j_xy = max(h_xy, 0)`` attached to an antisymmetric class ``h``."""
    h = np.asarray(h)
    if not np.array_equal(h, -np.swapaxes(h, -1, -2)):
        raise NetworkError("homology class must be antisymmetric")
    return np.maximum(h, 0)


def class_of_flow(j) -> np.ndarray:
    """Inverse of :func:`flow_of`."""
    return homology_class(j)


def is_flow(j) -> bool:
    j = np.asarray(j)
    return is_eulerian(j) and not np.any((j > 0) & (np.swapaxes(j, -1, -2) > 0))


def flow_markov(j) -> np.ndarray:
    """Stochastic matrix ``q[x, y] = j_xy / j_x`` (identity row when ``j_x = 0``).

    The measure ``j_x`` is invariant: ``j_x q`` summed over ``x`` gives ``j_y``.
    """
    j = np.asarray(j, dtype=float)
    jx = j.sum(axis=1)
    q = np.eye(j.shape[0])
    pos = jx > 0
    q[pos] = j[pos] / jx[pos, None]
    return q


def stochasticity(j, x: int | None = None):
    """``S_x = j_x^2 - sum_y j_xy^2``; all vertices when ``x`` is None."""
    j = np.asarray(j, dtype=np.int64)
    S = j.sum(axis=1) ** 2 - (j**2).sum(axis=1)
    return S if x is None else int(S[x])


def r_field(N) -> np.ndarray:
    """``R_x = N_x^2 - sum_y N_xy^2`` per vertex."""
    return stochasticity(N)


# -- Bessel kernel and the flow law -----------------------------------------

def bessel_I(nu: int, x: float) -> float:
    """Modified Bessel function ``I_nu(x)`` of integer order, by its power series."""
    if nu < 0 or int(nu) != nu:
        raise ValueError("order must be a non-negative integer")
    nu = int(nu)
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0:
        return 1.0 if nu == 0 else 0.0
    half = x / 2.0
    log_t0 = nu * math.log(half) - math.lgamma(nu + 1)
    q = half * half
    total = 1.0
    term = 1.0
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + nu))
        total += term
        # past the peak the term ratio is below 1/2, so the remainder is below ``term``
        if m * (m + nu) > 2 * q and term < 1e-17 * total:
            break
    return math.exp(log_t0) * total


def flow_joint_density(g: WeightedGraph, h, rho) -> float:
    """Joint density of the flow of ``N^(1)`` and the occupation field."""
    h = np.asarray(h)
    if not is_flow(h):
        raise NetworkError("h is not a flow")
    rho = np.asarray(rho, dtype=float)
    lam = duality_measure(g)
    C = g.conductance
    out = math.exp(log_det_I_minus_P(g) + np.log(lam).sum() - (lam * rho).sum())
    for x, y in g.unordered_edges:
        he = max(h[x, y], h[y, x])
        out *= bessel_I(he, 2.0 * math.sqrt(rho[x] * rho[y]) * C[x, y])
    return out


def flow_probability(g: WeightedGraph, h, order: int = 32) -> float:
    """``P(flow of N^(1) = h)`` by Gauss-Laguerre quadrature over the field."""
    h = np.asarray(h)
    if not is_flow(h):
        raise NetworkError("h is not a flow")
    nodes, weights = np.polynomial.laguerre.laggauss(order)
    lam = duality_measure(g)
    C = g.conductance
    # substitute rho_x = t / lam_x so that each axis carries weight e^{-t}
    grids = np.meshgrid(*[nodes / lam[x] for x in range(g.n)], indexing="ij")
    wgrid = np.ones([order] * g.n)
    for x in range(g.n):
        shape = [1] * g.n
        shape[x] = order
        wgrid = wgrid * weights.reshape(shape)
    integrand = np.ones_like(wgrid)
    for x, y in g.unordered_edges:
        he = int(max(h[x, y], h[y, x]))
        arg = 2.0 * np.sqrt(grids[x] * grids[y]) * C[x, y]
        integrand = integrand * _bessel_vec(he, arg)
    return float(math.exp(log_det_I_minus_P(g)) * (wgrid * integrand).sum())


def _bessel_vec(nu, arr):
    flat = np.asarray(arr).ravel()
    return np.array([bessel_I(nu, float(a)) for a in flat]).reshape(np.shape(arr))


def flow_probability_series(g: WeightedGraph, h, max_sym: int = 40) -> float:
    """Same probability by summing the network law over symmetric parts.

    Sums ``P(N^(1) = h + s + s^T)`` over symmetric ``s`` with each edge
    count at most ``max_sym``.
    """
    h = np.asarray(h, dtype=np.int64)
    edges = g.unordered_edges
    # the law factorises over edges once vertex totals are fixed, so sum directly
    P = transition_matrix(g)
    total = 0.0
    base_log = log_det_I_minus_P(g)
    for sym in itertools.product(range(max_sym + 1), repeat=len(edges)):
        k = h.copy()
        for (x, y), s in zip(edges, sym):
            k[x, y] += s
            k[y, x] += s
        kx = k.sum(axis=1)
        mask = k > 0
        lp = base_log + gammaln(kx + 1).sum() - gammaln(k[mask] + 1).sum() + (k[mask] * np.log(P[mask])).sum()
        total += math.exp(lp)
    return total


def enumerate_flows(g: WeightedGraph, max_total: int) -> Iterator[np.ndarray]:
    for k in enumerate_eulerian(g, max_total):
        if is_flow(k):
            yield k


# -- quasi-invariance -------------------------------------------------------

@dataclass
class QuasiInvariance:
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float

    @property
    def se(self) -> float:
        return math.hypot(self.se_lhs, self.se_rhs)


def quasi_invariance_check(
    g: WeightedGraph,
    k,
    F: Callable[[np.ndarray], np.ndarray],
    samples: np.ndarray,
    samples_rhs: np.ndarray | None = None,
) -> QuasiInvariance:
    """Monte Carlo estimates of both sides of the shift identity.

    ``F`` maps a stack of networks ``(R, n, n)`` to ``R`` values.  The left
    side averages ``F(N + k)``; the right side averages
    ``1{N >= k} F(N) prod_x (N_x-k_x)!/N_x! prod N_xy!/(N_xy-k_xy)! P^-k``.
    ``samples_rhs`` lets the two sides use independent draws.
    """
    k = _as_network(g, k)
    if not is_eulerian(k):
        raise NetworkError("shift must be Eulerian")
    N = np.asarray(samples)
    M = N if samples_rhs is None else np.asarray(samples_rhs)
    lhs_vals = np.asarray(F(N + k), dtype=float)

    P = transition_matrix(g)
    ok = np.all(M >= k, axis=(1, 2))
    Mx = M.sum(axis=2)
    kx = k.sum(axis=1)
    logw = (gammaln(np.maximum(Mx - kx, 0) + 1) - gammaln(Mx + 1)).sum(axis=1)
    mask = k > 0
    logw += (gammaln(M[:, mask] + 1) - gammaln(np.maximum(M[:, mask] - k[mask], 0) + 1)).sum(axis=1)
    logw -= (k[mask] * np.log(P[mask])).sum()
    rhs_vals = np.where(ok, np.asarray(F(M), dtype=float) * np.exp(np.where(ok, logw, 0.0)), 0.0)

    n1, n2 = len(lhs_vals), len(rhs_vals)
    return QuasiInvariance(
        float(lhs_vals.mean()),
        float(rhs_vals.mean()),
        float(lhs_vals.std(ddof=1) / math.sqrt(n1)),
        float(rhs_vals.std(ddof=1) / math.sqrt(n2)),
    )


# -- text format ------------------------------------------------------------

def read_network(text: str, n: int) -> tuple[np.ndarray, str]:
    """Parse ``x y count`` lines; a ``#kind: even`` header marks an even network.

    Returns the array and the kind (``"eulerian"`` or ``"even"``).
    """
    kind = "eulerian"
    k = np.zeros((n, n), dtype=np.int64)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().lower()
            if body.startswith("kind:"):
                kind = body.split(":", 1)[1].strip()
                if kind not in ("eulerian", "even"):
                    raise NetworkError(f"line {lineno}: unknown network kind {kind!r}")
            continue
        parts = line.split()
        if len(parts) != 3:
            raise NetworkError(f"line {lineno}: expected 'x y count'")
        try:
            x, y, c = (int(p) for p in parts)
        except ValueError:
            raise NetworkError(f"line {lineno}: non-integer field") from None
        if not (0 <= x < n and 0 <= y < n) or c < 0:
            raise NetworkError(f"line {lineno}: entry out of range")
        if kind == "even":
            k[x, y] += c
            if x != y:
                k[y, x] += c
        else:
            k[x, y] += c
    return k, kind


def write_network(k, kind: str = "eulerian") -> str:
    k = np.asarray(k)
    lines = [f"#kind: {kind}"]
    n = k.shape[0]
    for x in range(n):
        for y in range(n):
            if k[x, y] and (kind == "eulerian" or x < y):
                lines.append(f"{x} {y} {int(k[x, y])}")
    return "\n".join(lines) + "\n"
