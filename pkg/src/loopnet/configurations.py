"""Configurations of coupled half-edges and their even counterparts.

A configuration puts ``c_x`` numbered exiting and ``c_x`` numbered entering
half-edges at every vertex and couples each exiting half-edge ``(x, i)`` to
an entering half-edge ``(y, j)`` across an edge ``{x, y}``.  It is stored as
``coupling[x][i] = (y, j)``.  An even configuration puts ``2 k_x`` numbered
slots at every vertex and pairs slots across edges.

Counting oracles come in three independent flavours: brute-force
enumeration, a memoised recursion over remaining capacities, and the
permanent (or hafnian) of the slot adjacency matrix.  Generating functions
are expanded as exact rational series.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .graph import WeightedGraph, det_I_minus_P, log_network_weight, permanent, duality_measure
from .loops import sample_networks
from .networks import NetworkError, is_eulerian, is_even, symmetrize

MAX_ENUM_PAIRS = 8


class ConfigurationError(ValueError):
    pass


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class Configuration:
    """``coupling[x][i] = (y, j)``: exit ``i`` at ``x`` enters ``y`` as entry ``j``."""

    coupling: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def n(self) -> int:
        return len(self.coupling)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.coupling)

    @property
    def size(self) -> int:
        """``N(c)``, the number of coupled pairs."""
        return sum(self.counts)

    def network(self) -> np.ndarray:
        """Induced network ``c~[x, y]`` counting exits at ``x`` coupled into ``y``."""
        k = np.zeros((self.n, self.n), dtype=np.int64)
        for x, row in enumerate(self.coupling):
            for y, _ in row:
                k[x, y] += 1
        return k

    def entering(self) -> list[list[tuple[int, int]]]:
        """``entering[y][j] = (x, i)``, the inverse coupling."""
        inv = [[None] * c for c in self.counts]
        for x, row in enumerate(self.coupling):
            for i, (y, j) in enumerate(row):
                inv[y][j] = (x, i)
        return inv

    def shifted(self, exit_shift: Sequence[int], enter_shift: Sequence[int] | None = None) -> "Configuration":
        """Renumber half-edges cyclically: exit ``i`` at ``x`` becomes ``i + r_x``.

        With ``enter_shift`` omitted entering half-edges move by the same
        amount, which is the equivalence of configurations defining the same
        numbered map up to the choice of first half-edge.
        """
        counts = self.counts
        es = list(exit_shift)
        ns = es if enter_shift is None else list(enter_shift)
        new = [[None] * c for c in counts]
        for x, row in enumerate(self.coupling):
            for i, (y, j) in enumerate(row):
                new[x][(i + es[x]) % counts[x]] = (y, (j + ns[y]) % counts[y])
        return Configuration(tuple(tuple(r) for r in new))


def empty_configuration(n: int) -> Configuration:
    return Configuration(tuple(() for _ in range(n)))


def validate_configuration(g: WeightedGraph, c: Configuration) -> None:
    if c.n != g.n:
        raise ConfigurationError(f"configuration has {c.n} vertices, graph has {g.n}")
    counts = c.counts
    seen = set()
    for x, row in enumerate(c.coupling):
        for i, (y, j) in enumerate(row):
            if not (0 <= y < g.n) or g.adjacency[x, y] == 0:
                raise ConfigurationError(f"exit ({x}, {i}) is coupled across a non-edge to {y}")
            if not (0 <= j < counts[y]):
                raise ConfigurationError(f"entry ({y}, {j}) does not exist")
            if (y, j) in seen:
                raise ConfigurationError(f"entry ({y}, {j}) is coupled twice")
            seen.add((y, j))


def multiplicity(k) -> int:
    """``prod_x (k_x!)^2 / prod_{x,y} k_xy!``, configurations over a network."""
    k = np.asarray(k, dtype=np.int64)
    if not is_eulerian(k):
        raise NetworkError("network is not Eulerian")
    num = 1
    for t in k.sum(axis=1):
        num *= math.factorial(int(t)) ** 2
    den = 1
    for v in k.ravel():
        den *= math.factorial(int(v))
    return num // den


def q_probability(g: WeightedGraph, c: Configuration) -> float:
    """``det(I - P) prod P^{c~} / prod_x c_x!``."""
    validate_configuration(g, c)
    logw = log_network_weight(g, c.network()) - sum(math.lgamma(t + 1) for t in c.counts)
    return det_I_minus_P(g) * math.exp(logw)


def uniform_preimage(k, rng) -> Configuration:
    """A configuration drawn uniformly among those inducing the network ``k``.

    Exiting half-edges at ``x`` get destinations by a uniform shuffle of the
    multiset ``{y repeated k_xy}``, entering half-edges at ``y`` get sources
    likewise, and on each oriented edge the exits and entries carrying it
    are matched by a uniform permutation.  Each configuration arises from
    exactly one such triple of choices.
    """
    k = np.asarray(k, dtype=np.int64)
    n = k.shape[0]
    exit_dest = []
    enter_src = []
    for x in range(n):
        d = np.repeat(np.arange(n), k[x])
        exit_dest.append(rng.permutation(d))
        s = np.repeat(np.arange(n), k[:, x])
        enter_src.append(rng.permutation(s))
    coupling = [[None] * len(exit_dest[x]) for x in range(n)]
    for x in range(n):
        for y in range(n):
            if k[x, y] == 0:
                continue
            exits = np.flatnonzero(exit_dest[x] == y)
            entries = np.flatnonzero(enter_src[y] == x)
            entries = entries[rng.permutation(len(entries))]
            for i, j in zip(exits, entries):
                coupling[x][int(i)] = (y, int(j))
    return Configuration(tuple(tuple(r) for r in coupling))


def sample_configuration(g: WeightedGraph, seed=None, kmax: int | None = None) -> Configuration:
    """One configuration with law ``Q``: a soup network and a uniform preimage."""
    return sample_configurations(g, 1, seed, kmax)[0]


def sample_configurations(g: WeightedGraph, n: int, seed=None, kmax: int | None = None) -> list[Configuration]:
    rng = _rng(seed)
    nets = sample_networks(g, 1.0, n, seed=rng, kmax=kmax).networks
    return [uniform_preimage(k, rng) for k in nets]


# -- enumeration and counting ----------------------------------------------

def _count_vectors(caps):
    return itertools.product(*[range(c + 1) for c in caps])


def configurations_with_counts(g: WeightedGraph, counts: Sequence[int]) -> Iterator[Configuration]:
    """All configurations with the given half-edge counts, by backtracking."""
    counts = [int(c) for c in counts]
    n = g.n
    exits = [(x, i) for x in range(n) for i in range(counts[x])]
    used = set()
    coupling = [[None] * counts[x] for x in range(n)]

    def rec(pos):
        if pos == len(exits):
            yield Configuration(tuple(tuple(r) for r in coupling))
            return
        x, i = exits[pos]
        for y in g.neighbours(x):
            for j in range(counts[y]):
                if (y, j) not in used:
                    used.add((y, j))
                    coupling[x][i] = (y, j)
                    yield from rec(pos + 1)
                    used.discard((y, j))
        coupling[x][i] = None

    yield from rec(0)


def enumerate_configurations(g: WeightedGraph, caps: Sequence[int] | int) -> list[Configuration]:
    """Every configuration with ``c_x <= caps_x``; at most 8 coupled pairs in total."""
    caps = [caps] * g.n if np.isscalar(caps) else list(caps)
    if len(caps) != g.n:
        raise ValueError("one cap per vertex")
    if sum(caps) > MAX_ENUM_PAIRS:
        raise ValueError(f"enumeration limited to {MAX_ENUM_PAIRS} half-edge pairs")
    out = []
    for counts in _count_vectors(caps):
        out.extend(configurations_with_counts(g, counts))
    return out


def count_configurations(adjacency, counts: Sequence[int]) -> int:
    """Number of configurations with given counts by a memoised recursion.

    Exits are coupled one vertex at a time; the state is the remaining
    number of free entries at every vertex.
    """
    A = np.asarray(adjacency)
    n = A.shape[0]
    counts = tuple(int(c) for c in counts)
    exit_seq = tuple(x for x in range(n) for _ in range(counts[x]))
    nbrs = [tuple(int(y) for y in np.flatnonzero(A[x])) for x in range(n)]

    @lru_cache(maxsize=None)
    def f(pos, free):
        if pos == len(exit_seq):
            return 1
        x = exit_seq[pos]
        total = 0
        for y in nbrs[x]:
            r = free[y]
            if r:
                nxt = free[:y] + (r - 1,) + free[y + 1:]
                total += r * f(pos + 1, nxt)
        return total

    return f(0, counts)


def slot_matrix(adjacency, counts: Sequence[int]) -> np.ndarray:
    """0/1 matrix between exit slots and entry slots joined by an edge."""
    A = np.asarray(adjacency)
    idx = [x for x in range(A.shape[0]) for _ in range(int(counts[x]))]
    return A[np.ix_(idx, idx)].astype(float)


def count_configurations_permanent(adjacency, counts: Sequence[int]) -> int:
    """Same count as :func:`count_configurations`, as a permanent."""
    if sum(counts) == 0:
        return 1
    return int(round(permanent(slot_matrix(adjacency, counts))))


def preimage_count(g: WeightedGraph, k) -> int:
    """Brute-force number of configurations inducing the network ``k``."""
    k = np.asarray(k)
    counts = k.sum(axis=1)
    return sum(1 for c in configurations_with_counts(g, counts) if np.array_equal(c.network(), k))


# -- exact series -----------------------------------------------------------

def _det_polynomial(M_terms, n):
    """Determinant of a matrix whose entries are polynomials (dict monomial -> Fraction)."""
    total: dict = {}
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = {(0,) * n: Fraction(-1 if inv % 2 else 1)}
        for r in range(n):
            term = _poly_mul(term, M_terms[r][perm[r]], None)
            if not term:
                break
        for m, v in term.items():
            total[m] = total.get(m, 0) + v
    return {m: v for m, v in total.items() if v != 0}


def _poly_mul(a, b, caps):
    out: dict = {}
    for ma, va in a.items():
        for mb, vb in b.items():
            m = tuple(p + q for p, q in zip(ma, mb))
            if caps is not None and any(e > c for e, c in zip(m, caps)):
                continue
            out[m] = out.get(m, 0) + va * vb
    return {m: v for m, v in out.items() if v != 0}


def det_I_minus_sA(adjacency, scale: Fraction | int = 1) -> dict:
    """``det(delta_xy - scale * s_x A_xy)`` as an exact polynomial in ``s``."""
    A = np.asarray(adjacency)
    n = A.shape[0]
    zero = (0,) * n
    M = []
    for x in range(n):
        row = []
        ex = tuple(1 if i == x else 0 for i in range(n))
        for y in range(n):
            entry = {}
            if x == y:
                entry[zero] = Fraction(1)
            if A[x, y]:
                entry[ex] = -Fraction(scale) * int(A[x, y])
            row.append(entry)
        M.append(row)
    return _det_polynomial(M, n)


def _monomials(caps):
    ms = list(itertools.product(*[range(c + 1) for c in caps]))
    ms.sort(key=lambda m: (sum(m), m))
    return ms


def series_inverse(poly: dict, caps: Sequence[int]) -> dict:
    """Truncated power series of ``1 / poly`` (constant term 1) up to ``caps``."""
    n = len(caps)
    zero = (0,) * n
    if poly.get(zero) != 1:
        raise ValueError("constant term must be 1")
    out: dict = {}
    for m in _monomials(caps):
        if m == zero:
            out[m] = Fraction(1)
            continue
        acc = Fraction(0)
        for d, v in poly.items():
            if d == zero:
                continue
            r = tuple(a - b for a, b in zip(m, d))
            if min(r) < 0:
                continue
            acc -= v * out.get(r, 0)
        out[m] = acc
    return out


def series_sqrt(series: dict, caps: Sequence[int]) -> dict:
    """Truncated square root of a series with constant term 1."""
    n = len(caps)
    zero = (0,) * n
    out: dict = {}
    for m in _monomials(caps):
        if m == zero:
            out[m] = Fraction(1)
            continue
        acc = series.get(m, Fraction(0))
        for d, v in out.items():
            if d == zero:
                continue
            r = tuple(a - b for a, b in zip(m, d))
            if r == zero or min(r) < 0:
                continue
            acc -= v * out.get(r, 0)
        out[m] = acc / 2
    return out


def _egf_counts(series, caps):
    out = {}
    for m in _monomials(caps):
        coef = series.get(m, Fraction(0)) * math.prod(math.factorial(e) for e in m)
        out[m] = coef
    return out


def config_generating_check(g: WeightedGraph, caps: Sequence[int] | int, method: str = "recursion"):
    """Counts of configurations against the series of ``1/det(delta - s_x A)``.

    Returns ``(counts, coefficients)`` as dictionaries keyed by count vector,
    where coefficients are ``prod c_x!`` times the Taylor coefficients.
    ``method`` picks the counting oracle: ``"recursion"``, ``"permanent"`` or
    ``"enumeration"``.
    """
    caps = [caps] * g.n if np.isscalar(caps) else list(caps)
    A = g.adjacency
    series = series_inverse(det_I_minus_sA(A), caps)
    coefs = _egf_counts(series, caps)
    counts = {}
    for m in _monomials(caps):
        if method == "recursion":
            counts[m] = count_configurations(A, m)
        elif method == "permanent":
            counts[m] = count_configurations_permanent(A, m)
        elif method == "enumeration":
            counts[m] = sum(1 for _ in configurations_with_counts(g, m))
        else:
            raise ValueError(f"unknown method {method!r}")
    return counts, coefs


# -- even configurations ------------------------------------------------------

@dataclass(frozen=True)
class EvenConfiguration:
    """``partner[x][i] = (y, j)``: slot ``i`` at ``x`` is paired with slot ``j`` at ``y``."""

    partner: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def n(self) -> int:
        return len(self.partner)

    @property
    def counts(self) -> tuple[int, ...]:
        """``k_x``, half the number of slots at ``x``."""
        return tuple(len(p) // 2 for p in self.partner)

    def network(self) -> np.ndarray:
        """Symmetric matrix of pair counts per unordered edge."""
        k = np.zeros((self.n, self.n), dtype=np.int64)
        for x, row in enumerate(self.partner):
            for y, _ in row:
                k[x, y] += 1
        return k


def validate_even_configuration(g: WeightedGraph, c: EvenConfiguration) -> None:
    if c.n != g.n:
        raise ConfigurationError("vertex count mismatch")
    for x, row in enumerate(c.partner):
        if len(row) % 2:
            raise ConfigurationError(f"vertex {x} has an odd number of slots")
        for i, (y, j) in enumerate(row):
            if g.adjacency[x, y] == 0:
                raise ConfigurationError(f"slot ({x}, {i}) is paired across a non-edge")
            if c.partner[y][j] != (x, i):
                raise ConfigurationError(f"pairing is not an involution at ({x}, {i})")


def even_multiplicity(k) -> int:
    """``prod_x (2 k_x)! / prod_{edges} k_e!`` for a symmetric even network."""
    k = np.asarray(k, dtype=np.int64)
    if not np.array_equal(k, k.T) or not is_even(k):
        raise NetworkError("network is not even")
    num = 1
    for deg in k.sum(axis=1):
        num *= math.factorial(int(deg))
    den = 1
    n = k.shape[0]
    for x in range(n):
        for y in range(x + 1, n):
            den *= math.factorial(int(k[x, y]))
    return num // den


def q_even_probability(g: WeightedGraph, c: EvenConfiguration) -> float:
    """``sqrt(det(I - P)) prod_e P_e^{c_e} / prod_x 2^{c_x} c_x!`` with ``P_e = sqrt(P_xy P_yx)``."""
    validate_even_configuration(g, c)
    k = c.network()
    lam = duality_measure(g)
    C = g.conductance
    logw = 0.0
    for x, y in g.unordered_edges:
        if k[x, y]:
            logw += k[x, y] * math.log(C[x, y] / math.sqrt(lam[x] * lam[y]))
    for t in c.counts:
        logw -= t * math.log(2) + math.lgamma(t + 1)
    return math.sqrt(det_I_minus_P(g)) * math.exp(logw)


def uniform_even_preimage(k, rng) -> EvenConfiguration:
    """Uniform even configuration over the symmetric even network ``k``."""
    k = np.asarray(k, dtype=np.int64)
    n = k.shape[0]
    slot_edge = [rng.permutation(np.repeat(np.arange(n), k[x])) for x in range(n)]
    partner = [[None] * len(slot_edge[x]) for x in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            if k[x, y] == 0:
                continue
            a = np.flatnonzero(slot_edge[x] == y)
            b = np.flatnonzero(slot_edge[y] == x)
            b = b[rng.permutation(len(b))]
            for i, j in zip(a, b):
                partner[x][int(i)] = (y, int(j))
                partner[y][int(j)] = (x, int(i))
    return EvenConfiguration(tuple(tuple(r) for r in partner))


def sample_even_configurations(g: WeightedGraph, n: int, seed=None, kmax: int | None = None) -> list[EvenConfiguration]:
    """Even configurations with law ``Q^ev`` from the soup at ``alpha = 1/2``."""
    rng = _rng(seed)
    nets = symmetrize(sample_networks(g, 0.5, n, seed=rng, kmax=kmax).networks)
    return [uniform_even_preimage(k, rng) for k in nets]


def sample_even_configuration(g: WeightedGraph, seed=None, kmax: int | None = None) -> EvenConfiguration:
    return sample_even_configurations(g, 1, seed, kmax)[0]


def even_configurations_with_counts(g: WeightedGraph, counts: Sequence[int]) -> Iterator[EvenConfiguration]:
    """All slot pairings with ``2 k_x`` slots at every vertex."""
    n = g.n
    slots = [(x, i) for x in range(n) for i in range(2 * int(counts[x]))]
    partner = {s: None for s in slots}

    def rec():
        free = next((s for s in slots if partner[s] is None), None)
        if free is None:
            yield EvenConfiguration(tuple(tuple(partner[(x, i)] for i in range(2 * int(counts[x]))) for x in range(n)))
            return
        x, _ = free
        for t in slots:
            if partner[t] is None and t[0] != x and g.adjacency[x, t[0]]:
                partner[free], partner[t] = t, free
                yield from rec()
                partner[free] = partner[t] = None

    yield from rec()


def count_even_configurations(adjacency, counts: Sequence[int]) -> int:
    """Number of even configurations, recursing on the first free slot."""
    A = np.asarray(adjacency)
    n = A.shape[0]
    nbrs = [tuple(int(y) for y in np.flatnonzero(A[x])) for x in range(n)]

    @lru_cache(maxsize=None)
    def f(free):
        x = next((v for v in range(n) if free[v]), None)
        if x is None:
            return 1
        total = 0
        for y in nbrs[x]:
            r = free[y]
            if r:
                nxt = list(free)
                nxt[x] -= 1
                nxt[y] -= 1
                total += r * f(tuple(nxt))
        return total

    return f(tuple(2 * int(c) for c in counts))


def hafnian(M) -> float:
    """Hafnian by expansion along the first row; for small even dimensions."""
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if m == 0:
        return 1.0
    if m % 2:
        return 0.0
    total = 0.0
    rest = list(range(1, m))
    for j in rest:
        if M[0, j] == 0:
            continue
        keep = [r for r in rest if r != j]
        total += M[0, j] * hafnian(M[np.ix_(keep, keep)])
    return total


def even_generating_check(g: WeightedGraph, caps: Sequence[int] | int, scale: Fraction | int = 2, method: str = "recursion"):
    """Counts of even configurations against ``det(delta - scale s_x A)^(-1/2)``.

    ``caps`` bounds the half-slot counts ``k_x``.  With ``scale = 2`` the
    exponential coefficients are exactly the counts.  Returns
    ``(counts, coefficients)`` keyed by count vector.
    """
    caps = [caps] * g.n if np.isscalar(caps) else list(caps)
    A = g.adjacency
    series = series_sqrt(series_inverse(det_I_minus_sA(A, scale), caps), caps)
    coefs = _egf_counts(series, caps)
    counts = {}
    for m in _monomials(caps):
        if method == "recursion":
            counts[m] = count_even_configurations(A, m)
        elif method == "hafnian":
            idx = [x for x in range(g.n) for _ in range(2 * m[x])]
            counts[m] = int(round(hafnian(A[np.ix_(idx, idx)])))
        elif method == "enumeration":
            counts[m] = sum(1 for _ in even_configurations_with_counts(g, m))
        else:
            raise ValueError(f"unknown method {method!r}")
    return counts, coefs


def even_preimage_count(g: WeightedGraph, k) -> int:
    k = np.asarray(k)
    counts = k.sum(axis=1) // 2
    return sum(1 for c in even_configurations_with_counts(g, counts) if np.array_equal(c.network(), k))
