"""Weighted graphs and the dense linear algebra built on them.

A graph carries symmetric edge conductances and a killing measure.  From these
we get the duality measure ``lam``, the sub-Markovian transition matrix ``P``,
the Green function ``G = (M_lam - C)^-1`` and a handful of determinants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

PD_TOL = 1e-10
MAX_PERMANENT_DIM = 15


class GraphError(ValueError):
    """Raised for graphs violating the model assumptions."""


@dataclass(frozen=True)
class WeightedGraph:
    """Finite connected graph with conductances and killing.

    Parameters
    ----------
    n : int
        Number of vertices, labelled ``0 .. n-1``.
    edges : sequence of (u, v, conductance)
        Unordered edges, no self-loops and no duplicates.
    killing : sequence of float
        Non-negative killing rate per vertex; at least one must be positive.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    killing: tuple[float, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v), float(c)) for u, v, c in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "killing", tuple(float(k) for k in self.killing))
        self._validate()

    def _validate(self):
        n = self.n
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        if len(self.killing) != n:
            raise GraphError(f"killing has {len(self.killing)} entries, expected {n}")
        if any(k < 0 or not math.isfinite(k) for k in self.killing):
            raise GraphError("killing rates must be finite and non-negative")
        if not any(k > 0 for k in self.killing):
            raise GraphError("transience requires a positive killing rate somewhere")
        seen = set()
        for u, v, c in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has a vertex out of range")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            if not (c > 0 and math.isfinite(c)):
                raise GraphError(f"edge {key} needs a positive conductance")
        if not _is_connected(n, seen):
            raise GraphError("graph is not connected")

    # -- basic matrices -------------------------------------------------
    @cached_property
    def conductance(self) -> np.ndarray:
        C = np.zeros((self.n, self.n))
        for u, v, c in self.edges:
            C[u, v] = C[v, u] = c
        C.setflags(write=False)
        return C

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = (self.conductance > 0).astype(int)
        A.setflags(write=False)
        return A

    @property
    def kappa(self) -> np.ndarray:
        return np.asarray(self.killing)

    @cached_property
    def oriented_edges(self) -> list[tuple[int, int]]:
        """All oriented edges ``(x, y)`` sorted lexicographically."""
        out = [(u, v) for u, v, _ in self.edges] + [(v, u) for u, v, _ in self.edges]
        return sorted(out)

    @cached_property
    def unordered_edges(self) -> list[tuple[int, int]]:
        return sorted((min(u, v), max(u, v)) for u, v, _ in self.edges)

    def neighbours(self, x: int) -> list[int]:
        return [int(y) for y in np.flatnonzero(self.adjacency[x])]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def cycle_rank(self) -> int:
        return self.n_edges - self.n + 1


def _is_connected(n, edge_keys):
    adj = [[] for _ in range(n)]
    for u, v in edge_keys:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


# -- constructors for the graphs used throughout the tests ----------------

def two_vertex(c: float = 1.0, kappa: Sequence[float] = (1.0, 1.0)) -> WeightedGraph:
    return WeightedGraph(2, ((0, 1, c),), tuple(kappa), name="two-vertex")


def single_vertex(kappa: float = 2.0) -> WeightedGraph:
    return WeightedGraph(1, (), (kappa,), name="single-vertex")


def complete_graph(d: int, kappa: float = 1.0, c: float = 1.0) -> WeightedGraph:
    edges = tuple((u, v, c) for u in range(d) for v in range(u + 1, d))
    return WeightedGraph(d, edges, (kappa,) * d, name=f"K{d}")


def triangle(kappa: float = 1.0) -> WeightedGraph:
    g = complete_graph(3, kappa)
    object.__setattr__(g, "name", "triangle")
    return g


def path_graph(n: int, kappa: float | Sequence[float] = 1.0, c: float = 1.0) -> WeightedGraph:
    if np.isscalar(kappa):
        kappa = (kappa,) * n
    edges = tuple((i, i + 1, c) for i in range(n - 1))
    return WeightedGraph(n, edges, tuple(kappa), name=f"path{n}")


def cycle_graph(n: int, kappa: float = 1.0, c: float = 1.0) -> WeightedGraph:
    edges = tuple((i, (i + 1) % n, c) for i in range(n))
    return WeightedGraph(n, edges, (kappa,) * n, name=f"cycle{n}")


# -- derived Markov data --------------------------------------------------

def duality_measure(g: WeightedGraph) -> np.ndarray:
    """``lam_x = sum_y C_xy + kappa_x``."""
    return g.conductance.sum(axis=1) + g.kappa


def transition_matrix(g: WeightedGraph, convention: str = "row") -> np.ndarray:
    """Sub-Markovian transition matrix.

    ``convention="row"`` gives ``P[x, y] = C_xy / lam_x`` (rows sum to at most
    one); ``"column"`` gives ``C_xy / lam_y``.  Products of ``P`` over the
    edges of any Eulerian network agree between the two.
    """
    lam = duality_measure(g)
    if convention == "row":
        return g.conductance / lam[:, None]
    if convention == "column":
        return g.conductance / lam[None, :]
    raise ValueError(f"unknown convention {convention!r}")


def energy_matrix(g: WeightedGraph) -> np.ndarray:
    """``M_lam - C``, the inverse of the Green function."""
    return np.diag(duality_measure(g)) - g.conductance


def green_function(g: WeightedGraph) -> np.ndarray:
    Q = energy_matrix(g)
    try:
        np.linalg.cholesky(Q)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("M_lam - C is not positive definite") from exc
    G = np.linalg.inv(Q)
    return (G + G.T) / 2


def log_det_I_minus_P(g: WeightedGraph) -> float:
    sign, logdet = np.linalg.slogdet(energy_matrix(g))
    if sign <= 0:
        raise np.linalg.LinAlgError("M_lam - C is not positive definite")
    return float(logdet - np.log(duality_measure(g)).sum())


def det_I_minus_P(g: WeightedGraph) -> float:
    """``det(I - P) = det(M_lam - C) / prod_x lam_x``, in ``(0, 1]``."""
    return math.exp(log_det_I_minus_P(g))


def spectral_radius(g: WeightedGraph) -> float:
    """Spectral radius of ``P`` via its symmetrisation ``M^-1/2 C M^-1/2``."""
    s = 1.0 / np.sqrt(duality_measure(g))
    S = s[:, None] * g.conductance * s[None, :]
    if g.n == 1:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(S))))


def log_network_weight(g: WeightedGraph, k: np.ndarray, convention: str = "row") -> float:
    """``log prod_{x,y} P_xy ** k_xy`` for an integer network ``k``."""
    P = transition_matrix(g, convention)
    k = np.asarray(k)
    mask = k > 0
    if np.any(P[mask] == 0):
        return -math.inf
    return float((k[mask] * np.log(P[mask])).sum())


# -- permanents, twists, factorisations ----------------------------------

def permanent(M) -> float:
    """Permanent by Ryser's inclusion-exclusion formula with Gray-code order."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("permanent needs a square matrix")
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n > MAX_PERMANENT_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_PERMANENT_DIM}")
    row_sums = np.zeros(n)
    total = 0.0
    in_set = np.zeros(n, dtype=bool)
    sign = -1.0 if n % 2 else 1.0  # (-1)^(n - |S|) starting from |S| = 0
    for i in range(1, 2**n):
        # flip the column given by the lowest set bit of i (Gray code step)
        j = (i & -i).bit_length() - 1
        if in_set[j]:
            row_sums -= A[:, j]
        else:
            row_sums += A[:, j]
        in_set[j] = not in_set[j]
        sign = -sign
        total += sign * np.prod(row_sums)
    return float(total)


class TwistedGreen(NamedTuple):
    matrix: np.ndarray
    det: float


def twisted_energy(g: WeightedGraph, omega: np.ndarray) -> np.ndarray:
    """``M_lam - C * exp(2 pi i omega)``; Hermitian when omega is antisymmetric."""
    omega = np.asarray(omega, dtype=float)
    return np.diag(duality_measure(g)).astype(complex) - g.conductance * np.exp(2j * np.pi * omega)


def twist_green(g: WeightedGraph, omega: np.ndarray) -> TwistedGreen:
    """Green function twisted by the one-form ``omega`` and its determinant.

    ``omega`` is an ``n x n`` antisymmetric array indexed by oriented edges.
    The returned determinant is that of the twisted Green function itself,
    i.e. ``1 / det(M_lam - C * exp(2 pi i omega))``.
    """
    omega = np.asarray(omega, dtype=float)
    if not np.allclose(omega, -omega.T, atol=1e-12):
        raise ValueError("omega must be antisymmetric")
    Q = twisted_energy(g, omega)
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - excluded by transience
        raise np.linalg.LinAlgError("twisted energy matrix is singular") from exc
    logdet = 2.0 * np.log(np.abs(np.diag(L))).sum()
    inv = np.linalg.inv(Q)
    return TwistedGreen((inv + inv.conj().T) / 2, math.exp(-logdet))


def chol_factor(G) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if not np.allclose(G, G.T, atol=PD_TOL):
        raise np.linalg.LinAlgError("matrix is not symmetric")
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("matrix is not positive definite") from exc
