"""Poissonian ensembles of discrete loops and the fields they induce.

Loops of length ``k`` carry total mass ``trace(P^k) / k`` under the loop
measure.  An ensemble at intensity ``alpha`` is drawn length by length: a
Poisson number of based loops, each with a start vertex chosen with weight
``(P^k)_xx`` and then completed by a Markov bridge back to the start.
Forgetting the base point gives the unrooted loop.

Everything here is vectorised over independent replicas because the
verification code needs 10^5 - 10^6 ensembles on a single core.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import (
    WeightedGraph,
    duality_measure,
    log_det_I_minus_P,
    spectral_radius,
    transition_matrix,
)

DEFAULT_TAIL_EPS = 1e-9
MAX_KMAX = 5000


class TruncationWarning(UserWarning):
    pass


# -- loops -----------------------------------------------------------------

def canonical_rotation(seq: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically smallest rotation of a cyclic sequence."""
    seq = tuple(int(v) for v in seq)
    if not seq:
        return seq
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def loop_multiplicity(seq: Sequence[int]) -> int:
    """Largest ``j`` such that ``seq`` is a ``j``-fold repetition."""
    k = len(seq)
    for p in range(1, k + 1):
        if k % p == 0 and tuple(seq[p:]) + tuple(seq[:p]) == tuple(seq):
            return k // p
    return 1


@dataclass(frozen=True, order=True)
class DiscreteLoop:
    """Unrooted discrete loop stored by its canonical rotation."""

    vertices: tuple[int, ...]

    @classmethod
    def from_sequence(cls, seq: Sequence[int]) -> "DiscreteLoop":
        if len(seq) < 2:
            raise ValueError("discrete loops have at least two vertices")
        return cls(canonical_rotation(seq))

    def __len__(self):
        return len(self.vertices)

    @property
    def multiplicity(self) -> int:
        return loop_multiplicity(self.vertices)

    def steps(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def reversed(self) -> "DiscreteLoop":
        return DiscreteLoop.from_sequence(self.vertices[::-1])


@dataclass(frozen=True)
class LoopEnsemble:
    loops: tuple[DiscreteLoop, ...]
    alpha: float
    seed: int | None
    kmax: int
    n_vertices: int

    def __len__(self):
        return len(self.loops)

    def network(self) -> np.ndarray:
        return edge_network(self)

    def counter(self) -> tuple[DiscreteLoop, ...]:
        """Sorted multiset, usable as a hashable key."""
        return tuple(sorted(self.loops))


def loops_network(loops: Iterable, n: int) -> np.ndarray:
    N = np.zeros((n, n), dtype=np.int64)
    for loop in loops:
        v = loop.vertices if isinstance(loop, DiscreteLoop) else tuple(loop)
        for i in range(len(v)):
            N[v[i], v[(i + 1) % len(v)]] += 1
    return N


def edge_network(ens: LoopEnsemble) -> np.ndarray:
    """Oriented jump counts ``N[x, y]`` summed over all loops of the ensemble."""
    return loops_network(ens.loops, ens.n_vertices)


# -- loop measure ----------------------------------------------------------

def loop_length_masses(g: WeightedGraph, kmax: int) -> tuple[np.ndarray, float]:
    """Masses ``m_k = trace(P^k)/k`` for ``k = 2..kmax`` and a bound on the rest.

    Returns ``(m, tail)`` with ``m[k - 2] = m_k`` and
    ``tail >= sum_{k > kmax} m_k``.
    """
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    powers = _matrix_powers(transition_matrix(g), kmax)
    ks = np.arange(2, kmax + 1)
    masses = np.trace(powers[2:], axis1=1, axis2=2) / ks
    return masses, tail_bound(g, kmax)


def tail_bound(g: WeightedGraph, kmax: int) -> float:
    r = spectral_radius(g)
    if r == 0.0:
        return 0.0
    return g.n * r ** (kmax + 1) / ((kmax + 1) * (1 - r))


def default_kmax(g: WeightedGraph, eps: float = DEFAULT_TAIL_EPS) -> int:
    k = 2
    while tail_bound(g, k) > eps:
        k += 1
        if k > MAX_KMAX:
            raise ValueError("spectral radius too close to 1 for the truncation budget")
    return k


def _matrix_powers(P, kmax):
    n = P.shape[0]
    out = np.empty((kmax + 1, n, n))
    out[0] = np.eye(n)
    for k in range(1, kmax + 1):
        out[k] = out[k - 1] @ P
    return out


class _SoupSampler:
    """Precomputed bridge tables for one graph and one truncation level."""

    def __init__(self, g: WeightedGraph, kmax: int | None = None, eps: float = DEFAULT_TAIL_EPS):
        self.g = g
        self.kmax = default_kmax(g, eps) if kmax is None else int(kmax)
        if self.kmax < 2:
            raise ValueError("kmax must be at least 2")
        tail = tail_bound(g, self.kmax)
        if tail > eps:
            warnings.warn(
                f"loop length truncated at {self.kmax}; neglected mass up to {tail:.3g}",
                TruncationWarning,
                stacklevel=3,
            )
        self.tail = tail
        self.P = transition_matrix(g)
        self.powers = _matrix_powers(self.P, self.kmax)
        traces = np.trace(self.powers, axis1=1, axis2=2)
        self.masses = np.zeros(self.kmax + 1)
        self.masses[2:] = traces[2:] / np.arange(2, self.kmax + 1)

    def sample(self, alpha: float, replicas: int, rng: np.random.Generator):
        """Draw loops for ``replicas`` independent ensembles.

        Returns a list of ``(k, owner, paths)`` where ``paths`` is an
        ``(L, k)`` integer array of based loops of length ``k`` and
        ``owner[i]`` the replica that loop ``i`` belongs to.
        """
        out = []
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        if alpha == 0 or replicas == 0:
            return out
        n = self.g.n
        for k in range(2, self.kmax + 1):
            m = self.masses[k]
            if m <= 0:
                continue
            count = rng.poisson(alpha * m * replicas)
            if count == 0:
                continue
            owner = rng.integers(0, replicas, size=count)
            diag = np.clip(np.diagonal(self.powers[k]), 0, None)
            start = rng.choice(n, size=count, p=diag / diag.sum())
            paths = np.empty((count, k), dtype=np.int64)
            paths[:, 0] = start
            cur = start
            for step in range(1, k):
                remaining = k - step
                # weight of w: P[cur, w] * (P^remaining)[w, start]
                w = self.P[cur] * self.powers[remaining][:, start].T
                cum = np.cumsum(w, axis=1)
                u = rng.random(count) * cum[:, -1]
                nxt = (cum < u[:, None]).sum(axis=1)
                nxt = np.minimum(nxt, n - 1)
                paths[:, step] = nxt
                cur = nxt
            out.append((k, owner, paths))
        return out


def _networks_from_batches(batches, replicas, n):
    flat = np.zeros(replicas * n * n, dtype=np.int64)
    for k, owner, paths in batches:
        src = paths
        dst = np.roll(paths, -1, axis=1)
        idx = owner[:, None] * (n * n) + src * n + dst
        flat += np.bincount(idx.ravel(), minlength=replicas * n * n)
    return flat.reshape(replicas, n, n)


def _loop_counts(batches, replicas):
    counts = np.zeros(replicas, dtype=np.int64)
    for _, owner, _ in batches:
        counts += np.bincount(owner, minlength=replicas)
    return counts


def sample_ensemble(g: WeightedGraph, alpha: float, kmax: int | None = None, seed: int | None = None) -> LoopEnsemble:
    """Sample one Poissonian ensemble of discrete loops at intensity ``alpha``."""
    sampler = _SoupSampler(g, kmax)
    rng = np.random.default_rng(seed)
    loops = []
    for _, _, paths in sampler.sample(alpha, 1, rng):
        loops.extend(DiscreteLoop.from_sequence(row) for row in paths)
    return LoopEnsemble(tuple(loops), alpha, seed, sampler.kmax, g.n)


def sample_ensembles(g: WeightedGraph, alpha: float, n: int, seed: int | None = None, kmax: int | None = None) -> list[LoopEnsemble]:
    """``n`` independent ensembles, sharing one bridge table."""
    sampler = _SoupSampler(g, kmax)
    rng = np.random.default_rng(seed)
    per = [[] for _ in range(n)]
    for _, owner, paths in sampler.sample(alpha, n, rng):
        for r, row in zip(owner, paths):
            per[r].append(DiscreteLoop.from_sequence(row))
    return [LoopEnsemble(tuple(ls), alpha, seed, sampler.kmax, g.n) for ls in per]


@dataclass
class SoupBatch:
    """Networks (and loop counts) of many independent ensembles."""

    networks: np.ndarray  # (R, n, n)
    loop_counts: np.ndarray  # (R,)
    alpha: float
    kmax: int


def sample_networks(
    g: WeightedGraph,
    alpha: float,
    n: int,
    seed: int | None = None,
    kmax: int | None = None,
    chunk: int = 200_000,
) -> SoupBatch:
    """Edge networks ``N^(alpha)`` of ``n`` independent ensembles."""
    sampler = _SoupSampler(g, kmax)
    rng = np.random.default_rng(seed)
    nets, counts = [], []
    done = 0
    while done < n:
        r = min(chunk, n - done)
        batches = sampler.sample(alpha, r, rng)
        nets.append(_networks_from_batches(batches, r, g.n))
        counts.append(_loop_counts(batches, r))
        done += r
    if not nets:
        return SoupBatch(np.zeros((0, g.n, g.n), dtype=np.int64), np.zeros(0, dtype=np.int64), alpha, sampler.kmax)
    return SoupBatch(np.concatenate(nets), np.concatenate(counts), alpha, sampler.kmax)


def expected_loop_count(g: WeightedGraph, alpha: float = 1.0) -> float:
    """``-alpha * log det(I - P)``: mean number of discrete loops."""
    return -alpha * log_det_I_minus_P(g)


# -- occupation field ------------------------------------------------------

def occupation_field(g: WeightedGraph, net: np.ndarray, alpha: float, seed=None) -> np.ndarray:
    """Occupation field drawn conditionally on the jump network.

    Given the network, the field values are independent Gamma variables with
    rate ``lam_x`` and shape ``N_x + 1`` for ``alpha = 1`` or ``N_x + 1/2``
    for ``alpha = 1/2``, where ``N_x`` is the number of jumps out of ``x``.
    ``net`` may be a single ``(n, n)`` network or a stack ``(R, n, n)``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if alpha == 1:
        shift = 1.0
    elif alpha == 0.5:
        shift = 0.5
    else:
        raise ValueError("occupation field is only available for alpha in {1/2, 1}")
    net = np.asarray(net)
    jumps = net.sum(axis=-1)
    lam = duality_measure(g)
    return rng.gamma(jumps + shift) / lam


# -- Wilson-type construction ---------------------------------------------

def wilson_sample(g: WeightedGraph, vertex_order: Sequence[int] | None = None, seed=None):
    """Based loops from the extension of Wilson's algorithm.

    For each vertex ``x_i`` in ``vertex_order`` the chain is run from ``x_i``
    with the earlier vertices removed (killed on hitting them) until it dies;
    the based loop at ``x_i`` is the path up to its last visit to ``x_i``.

    Returns ``(based_loops, exits)`` where ``based_loops`` is a list of
    ``(base, path)`` with ``path`` a tuple starting at ``base`` (empty paths
    are omitted) and ``exits[x]`` lists the targets of the exiting half-edges
    at ``x`` in the order they are used.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = g.n
    order = list(range(n)) if vertex_order is None else [int(v) for v in vertex_order]
    if sorted(order) != list(range(n)):
        raise ValueError("vertex_order must be a permutation of the vertices")
    P = transition_matrix(g)
    alive = np.ones(n, dtype=bool)
    based = []
    exits = [[] for _ in range(n)]
    for x in order:
        Pr = P * alive[None, :]
        cum = np.cumsum(Pr, axis=1)
        path = [x]
        last = 0
        v = x
        while True:
            u = rng.random()
            row = cum[v]
            if u >= row[-1]:
                break
            v = int(np.searchsorted(row, u, side="right"))
            path.append(v)
            if v == x:
                last = len(path) - 1
        loop = tuple(path[:last])
        if loop:
            based.append((x, loop))
            for i, a in enumerate(loop):
                exits[a].append(loop[(i + 1) % len(loop)])
        alive[x] = False
    return based, [tuple(e) for e in exits]


def based_loops_from_exits(exits: Sequence[Sequence[int]], vertex_order: Sequence[int] | None = None):
    """Rebuild the based loops from an exit configuration.

    Starting at the first vertex (in ``vertex_order``) with unused exiting
    half-edges, follow exits in increasing order until the base vertex has
    none left; repeat.
    """
    n = len(exits)
    order = list(range(n)) if vertex_order is None else list(vertex_order)
    used = [0] * n
    based = []
    for x in order:
        if used[x] == len(exits[x]):
            continue
        path = []
        v = x
        while True:
            if v == x and used[x] == len(exits[x]):
                break
            path.append(v)
            nxt = exits[v][used[v]]
            used[v] += 1
            v = nxt
        based.append((x, tuple(path)))
    return based


def eppf_split(based_loop: Sequence[int], seed=None) -> list[DiscreteLoop]:
    """Split a based loop into loops by a Chinese restaurant partition.

    The excursions from the base point are partitioned with probability
    ``prod_i (n_i - 1)! / n!``; each block, concatenated in order, is a loop.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    path = tuple(int(v) for v in based_loop)
    if not path:
        return []
    base = path[0]
    cuts = [i for i, v in enumerate(path) if v == base] + [len(path)]
    excursions = [path[cuts[i]:cuts[i + 1]] for i in range(len(cuts) - 1)]
    tables = crp_partition(len(excursions), rng)
    loops = []
    for t in tables:
        seq = [v for i in sorted(t) for v in excursions[i]]
        loops.append(DiscreteLoop.from_sequence(seq))
    return loops


def crp_partition(n: int, rng: np.random.Generator) -> list[list[int]]:
    """Chinese restaurant partition of ``range(n)`` (parameter one)."""
    tables: list[list[int]] = []
    for i in range(n):
        u = rng.random() * (i + 1)
        if u < 1.0:
            tables.append([i])
            continue
        u -= 1.0
        for t in tables:
            if u < len(t):
                t.append(i)
                break
            u -= len(t)
        else:  # pragma: no cover
            tables[-1].append(i)
    return tables


def wilson_ensemble(g: WeightedGraph, vertex_order=None, seed=None) -> LoopEnsemble:
    """Wilson-type based loops split by the EPPF into an unrooted ensemble."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    based, _ = wilson_sample(g, vertex_order, rng)
    loops = []
    for _, path in based:
        loops.extend(eppf_split(path, rng))
    return LoopEnsemble(tuple(loops), 1.0, None, 0, g.n)


def wilson_networks(g: WeightedGraph, n: int, seed=None, vertex_order=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.zeros((n, g.n, g.n), dtype=np.int64)
    for r in range(n):
        based, _ = wilson_sample(g, vertex_order, rng)
        for _, path in based:
            for i, a in enumerate(path):
                out[r, a, path[(i + 1) % len(path)]] += 1
    return out


def first_vertex_free_probability(g: WeightedGraph, x: int) -> float:
    """``P(no loop visits x) = 1 / (lam_x G_xx)``."""
    from .graph import green_function

    return 1.0 / (duality_measure(g)[x] * green_function(g)[x, x])
