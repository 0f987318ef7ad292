"""Combinatorial maps built from configurations, their faces and genus.

At every vertex the darts are arranged cyclically, alternating exiting and
entering half-edges: ``exit_0, enter_0, exit_1, enter_1, ...`` (exit-first)
or ``enter_0, exit_0, ...`` (enter-first).  The coupling is the edge
involution.  Faces are the orbits of ``rotation o involution``; orbits of
exit darts form ``L+`` and orbits of entry darts form ``L-``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .configurations import Configuration
from .graph import WeightedGraph, duality_measure, green_function, log_det_I_minus_P
from .loops import DiscreteLoop

OUT, IN = 1, -1


@dataclass(frozen=True)
class CombinatorialMap:
    """Darts ``0 .. 2N-1`` with vertex, kind and half-edge index.

    ``rotation[d]`` is the next dart around ``vertex[d]``; ``involution[d]``
    is the other end of the edge.  ``first[x]`` is the distinguished first
    dart at ``x`` (or -1 when ``x`` carries no darts).
    """

    vertex: tuple[int, ...]
    kind: tuple[int, ...]
    index: tuple[int, ...]
    rotation: tuple[int, ...]
    involution: tuple[int, ...]
    first: tuple[int, ...]

    @property
    def n_darts(self) -> int:
        return len(self.vertex)

    @property
    def n_edges(self) -> int:
        return self.n_darts // 2

    @property
    def n_vertices(self) -> int:
        return sum(1 for f in self.first if f >= 0)

    def face_permutation(self) -> list[int]:
        return [self.rotation[self.involution[d]] for d in range(self.n_darts)]

    def faces(self) -> list[list[int]]:
        """Orbits of the face permutation, each starting at its smallest dart."""
        perm = self.face_permutation()
        return _orbits(perm)

    def components(self) -> list[list[int]]:
        """Dart sets of the connected components."""
        parent = list(range(self.n_darts))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for d in range(self.n_darts):
            for e in (self.rotation[d], self.involution[d]):
                ra, rb = find(d), find(e)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict = {}
        for d in range(self.n_darts):
            groups.setdefault(find(d), []).append(d)
        return list(groups.values())

    def dump(self) -> dict:
        """Darts as ``(vertex, position in rotation)`` and involution pairs."""
        pos = {}
        for x, f in enumerate(self.first):
            if f < 0:
                continue
            d, p = f, 0
            while True:
                pos[d] = p
                p += 1
                d = self.rotation[d]
                if d == f:
                    break
        darts = [[self.vertex[d], pos[d]] for d in range(self.n_darts)]
        pairs = sorted({(min(d, self.involution[d]), max(d, self.involution[d])) for d in range(self.n_darts)})
        return {"darts": darts, "involution": [list(p) for p in pairs]}


def _orbits(perm):
    seen = [False] * len(perm)
    out = []
    for d in range(len(perm)):
        if seen[d]:
            continue
        orb = []
        e = d
        while not seen[e]:
            seen[e] = True
            orb.append(e)
            e = perm[e]
        out.append(orb)
    return out


def build_map(c: Configuration, exit_first: bool = True) -> CombinatorialMap:
    """The numbered map of a configuration."""
    counts = c.counts
    vertex, kind, index = [], [], []
    dart_id = {}
    for x, cx in enumerate(counts):
        for i in range(cx):
            for kd in ((OUT, IN) if exit_first else (IN, OUT)):
                dart_id[(kd, x, i)] = len(vertex)
                vertex.append(x)
                kind.append(kd)
                index.append(i)
    m = len(vertex)
    rotation = [0] * m
    first = []
    for x, cx in enumerate(counts):
        if cx == 0:
            first.append(-1)
            continue
        seq = [dart_id[(kd, x, i)] for i in range(cx) for kd in ((OUT, IN) if exit_first else (IN, OUT))]
        for a, b in zip(seq, seq[1:] + seq[:1]):
            rotation[a] = b
        first.append(seq[0])
    involution = [0] * m
    for x, row in enumerate(c.coupling):
        for i, (y, j) in enumerate(row):
            a, b = dart_id[(OUT, x, i)], dart_id[(IN, y, j)]
            involution[a], involution[b] = b, a
    return CombinatorialMap(tuple(vertex), tuple(kind), tuple(index), tuple(rotation), tuple(involution), tuple(first))


@dataclass(frozen=True)
class FaceSets:
    plus: tuple[tuple[int, ...], ...]  # vertex sequences of L+ faces
    minus: tuple[tuple[int, ...], ...]  # vertex sequences of L- faces

    def loops_plus(self) -> list[DiscreteLoop]:
        return [DiscreteLoop.from_sequence(f) for f in self.plus]

    def loops_minus(self) -> list[DiscreteLoop]:
        return [DiscreteLoop.from_sequence(f) for f in self.minus]

    def network_plus(self, n: int) -> np.ndarray:
        return _faces_network(self.plus, n)

    def network_minus(self, n: int) -> np.ndarray:
        return _faces_network(self.minus, n)


def _faces_network(faces, n):
    k = np.zeros((n, n), dtype=np.int64)
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            k[a, b] += 1
    return k


def face_sets(c: Configuration, exit_first: bool = True) -> FaceSets:
    """Faces of the map projected to vertex loops.

    Exit-first, ``sigma+`` sends exit ``(x, i)`` coupled to entry ``(y, j)`` to
    exit ``(y, j + 1)``; its cycles visit vertices in jump order, so ``L+``
    carries the network of ``c``.  ``sigma-`` sends entry ``(y, j)`` to the
    entry following the exit coupled into it, here ``(x, i)``; its cycles
    run against the jumps, so ``L-`` carries the reversed network.
    """
    m = build_map(c, exit_first)
    plus, minus = [], []
    for orb in m.faces():
        verts = tuple(m.vertex[d] for d in orb)
        (plus if m.kind[orb[0]] == OUT else minus).append(verts)
    return FaceSets(tuple(plus), tuple(minus))


def euler_characteristic(c: Configuration, exit_first: bool = True) -> int:
    """``|{x: c_x > 0}| + |L+| + |L-| - N(c)``."""
    m = build_map(c, exit_first)
    return m.n_vertices + len(m.faces()) - m.n_edges


def genus_per_component(c: Configuration, exit_first: bool = True) -> list[int]:
    """Genus ``(2 - chi_i) / 2`` of every connected component, sorted by smallest dart."""
    m = build_map(c, exit_first)
    fperm = m.face_permutation()
    out = []
    for comp in sorted(m.components(), key=min):
        darts = set(comp)
        v = len({m.vertex[d] for d in comp})
        e = len(comp) // 2
        f = len(_orbits_restricted(fperm, darts))
        chi = v - e + f
        if chi % 2:
            raise ArithmeticError("odd Euler characteristic on a component")
        out.append((2 - chi) // 2)
    return out


def _orbits_restricted(perm, darts):
    seen = set()
    out = []
    for d in sorted(darts):
        if d in seen:
            continue
        orb = []
        e = d
        while e not in seen:
            seen.add(e)
            orb.append(e)
            e = perm[e]
        out.append(orb)
    return out


def map_report(c: Configuration, exit_first: bool = True) -> dict:
    fs = face_sets(c, exit_first)
    return {
        "faces_plus": [list(f) for f in fs.plus],
        "faces_minus": [list(f) for f in fs.minus],
        "chi": euler_characteristic(c, exit_first),
        "genus_per_component": genus_per_component(c, exit_first),
    }


def map_report_json(c: Configuration, exit_first: bool = True) -> str:
    return json.dumps(map_report(c, exit_first), sort_keys=True)


def same_map(a: CombinatorialMap, b: CombinatorialMap) -> bool:
    """Whether two maps are isomorphic by a dart bijection fixing vertices and kinds.

    The numbering of half-edges is ignored; the choice of first dart is
    therefore irrelevant.  On each component the image of one root dart
    determines the whole isomorphism, so all candidates are tried.
    """
    if a.n_darts != b.n_darts or sorted(zip(a.vertex, a.kind)) != sorted(zip(b.vertex, b.kind)):
        return False
    used_b: set = set()
    for comp in a.components():
        root = min(comp)
        found = None
        for cand in range(b.n_darts):
            if cand in used_b or b.vertex[cand] != a.vertex[root] or b.kind[cand] != a.kind[root]:
                continue
            phi = _extend_iso(a, b, root, cand)
            if phi is not None and not (set(phi.values()) & used_b):
                found = phi
                break
        if found is None:
            return False
        used_b |= set(found.values())
    return True


def _extend_iso(a, b, ra, rb):
    phi = {ra: rb}
    stack = [ra]
    while stack:
        d = stack.pop()
        e = phi[d]
        for da, db in ((a.rotation[d], b.rotation[e]), (a.involution[d], b.involution[e])):
            if da in phi:
                if phi[da] != db:
                    return None
                continue
            if a.vertex[da] != b.vertex[db] or a.kind[da] != b.kind[db]:
                return None
            phi[da] = db
            stack.append(da)
    if len(set(phi.values())) != len(phi):
        return None
    return phi


# -- expectations and closed forms -----------------------------------------

def occupied_vertex_expectation(g: WeightedGraph) -> float:
    """``E |{x: c_x > 0}| = sum_x (1 - 1/(lam_x G_xx))``."""
    lam = duality_measure(g)
    G = green_function(g)
    return float(np.sum(1 - 1 / (lam * np.diag(G))))


def expected_chi(g: WeightedGraph) -> float:
    """``sum_x (1 - 1/(lam_x G_xx)) - 2 ln det(I - P) - sum_{x,y} C_xy G_xy``."""
    G = green_function(g)
    return occupied_vertex_expectation(g) - 2 * log_det_I_minus_P(g) - float((g.conductance * G).sum())


def complete_graph_expected_chi(d: int, kappa: float) -> float:
    """``E chi`` on the complete graph with unit conductances and constant killing."""
    if d < 2 or kappa <= 0:
        raise ValueError("need d >= 2 and kappa > 0")
    return (
        d * (1 - (1 - 1 / (kappa + 1)) * (1 + 1 / (d - 1 + kappa)))
        - d * (d - 1) / (kappa * (d + kappa))
        - 2 * math.log(kappa / (d - 1 + kappa))
        - 2 * (d - 1) * math.log(1 + 1 / (d - 1 + kappa))
    )


def expected_essential_vertices(g: WeightedGraph) -> float:
    """``E |{x: c_x > 1}| = sum_x (1 - 1/(lam_x G_xx))^2``.

    The number of visits ``N_x`` is geometric with ``P(N_x = 0) = 1/(lam_x G_xx)``.
    """
    lam = duality_measure(g)
    G = green_function(g)
    return float(np.sum((1 - 1 / (lam * np.diag(G))) ** 2))


def complete_graph_essential_vertices(d: int, kappa: float) -> float:
    """``d (d-1)^2 / ((kappa+1)^2 (d-1+kappa)^2)``, the complete-graph value."""
    return d * (d - 1) ** 2 / ((kappa + 1) ** 2 * (d - 1 + kappa) ** 2)


def solve_u(d: float, v: float, tol: float = 1e-12) -> tuple[float, float]:
    """Root ``u >= 1`` of ``u - ln u = ln d - v`` and ``kappa = sqrt(d/u)``.

    Newton's method from the right of the root; ``u - ln u`` is convex and
    increasing on ``[1, inf)`` so the iterates decrease monotonically.
    """
    target = math.log(d) - v
    if target < 1:
        raise ValueError(f"no solution: ln d - v = {target} < 1")
    if target == 1:
        return 1.0, math.sqrt(d)
    u = max(2.0, 2 * target)
    for _ in range(200):
        r = u - math.log(u) - target
        if abs(r) < tol:
            break
        u = max(u - r / (1 - 1 / u), 1 + 1e-15)
    if abs(u - math.log(u) - target) >= tol:
        raise ArithmeticError("Newton iteration did not converge")
    return u, math.sqrt(d / u)
