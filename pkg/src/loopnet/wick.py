"""Gaussian moments by explicit enumeration of Wick pairings.

These are deliberately naive: they enumerate permutations (complex field)
or perfect matchings (real field) so they share no code with the samplers
or with the permanent routine in :mod:`loopnet.graph`.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .graph import WeightedGraph, duality_measure, green_function

MAX_PAIRS = 8


def complex_moment(G, a: Sequence[int], b: Sequence[int]) -> float:
    """``E[prod_i phi_{a_i} prod_i conj(phi_{b_i})]`` when ``E phi_x conj(phi_y) = 2 G_xy``."""
    if len(a) != len(b):
        return 0.0
    m = len(a)
    if m > MAX_PAIRS:
        raise ValueError("too many factors for explicit pairing")
    G = np.asarray(G)
    total = 0.0
    for perm in itertools.permutations(range(m)):
        prod = 1.0
        for i, j in enumerate(perm):
            prod *= 2.0 * G[a[i], b[j]]
        total += prod
    return total


def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i in range(len(rest)):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, rest[i])] + m


def real_moment(G, idx: Sequence[int]) -> float:
    """``E[prod_i phi_{idx_i}]`` for a centred real field with covariance ``G``."""
    if len(idx) % 2:
        return 0.0
    if len(idx) > 2 * MAX_PAIRS:
        raise ValueError("too many factors for explicit pairing")
    G = np.asarray(G)
    total = 0.0
    for m in _matchings(list(idx)):
        prod = 1.0
        for p, q in m:
            prod *= G[p, q]
        total += prod
    return total


def jump_moment(g: WeightedGraph, edges: Sequence[tuple[int, int]], vertices: Sequence[int] = ()) -> float:
    """Field side of the complex moment identity at ``alpha = 1``.

    Returns ``E[prod_i (C_i/2) phi_{x_i} conj(phi_{y_i}) prod_l (lam_l/2) |phi_{z_l}|^2]``.
    For distinct oriented edges and distinct vertices this equals
    ``E[prod N_{x_i y_i} prod (N_{z_l} + 1)]``; a repeated edge turns the
    power into a falling factorial.
    """
    G = green_function(g)
    C = g.conductance
    lam = duality_measure(g)
    a = [x for x, _ in edges] + list(vertices)
    b = [y for _, y in edges] + list(vertices)
    coef = np.prod([C[x, y] / 2 for x, y in edges]) * np.prod([lam[z] / 2 for z in vertices])
    return float(coef * complex_moment(G, a, b))


def even_jump_moment(g: WeightedGraph, edges: Sequence[tuple[int, int]], vertices: Sequence[int] = ()) -> float:
    """Field side of the real moment identity at ``alpha = 1/2``.

    Returns ``E[prod_i C_i phi_{x_i} phi_{y_i} prod_l (lam_l/2) phi_{z_l}^2]``
    which equals ``E[prod N_{x_i,y_i} prod (N_{z_l} + 1/2)]`` for distinct
    unordered edges and distinct vertices.
    """
    G = green_function(g)
    C = g.conductance
    lam = duality_measure(g)
    idx = [v for e in edges for v in e] + [z for z in vertices for _ in range(2)]
    coef = np.prod([C[x, y] for x, y in edges]) * np.prod([lam[z] / 2 for z in vertices])
    return float(coef * real_moment(G, idx))


def squared_field_product(G, vertices: Sequence[int], complex_field: bool) -> float:
    """``E[prod_x |phi_x|^2]`` (complex) or ``E[prod_x phi_x^2]`` (real)."""
    v = list(vertices)
    if complex_field:
        return complex_moment(G, v, v)
    return real_moment(G, [x for x in v for _ in range(2)])
