"""Harmonic one-forms and the law of the random homology class.

One-forms are antisymmetric ``n x n`` arrays.  The harmonic basis is dual to
the fundamental cycles of a BFS spanning tree, so a point ``t`` of the unit
cube ``[0, 1)^r`` (``r`` the cycle rank) stands for ``sum_i t_i omega_i`` on
the Jacobian torus, and the Fourier integral over the torus becomes a plain
periodic integral over ``t``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import WeightedGraph, energy_matrix, twisted_energy

MAX_TORUS_DIM = 3


@dataclass(frozen=True)
class HarmonicBasis:
    tree_edges: tuple[tuple[int, int], ...]
    cotree_edges: tuple[tuple[int, int], ...]  # oriented (u, v) with u < v
    cycles: tuple[np.ndarray, ...]  # fundamental cycles as antisymmetric arrays
    forms: tuple[np.ndarray, ...]  # harmonic forms dual to the cycles

    @property
    def rank(self) -> int:
        return len(self.forms)

    def form_at(self, t: Sequence[float]) -> np.ndarray:
        """Realise the torus point ``t`` as the one-form ``sum t_i omega_i``."""
        n = self.forms[0].shape[0] if self.forms else 0
        out = np.zeros((n, n))
        for ti, w in zip(t, self.forms):
            out += ti * w
        return out

    def coordinates(self, h) -> np.ndarray:
        """Integer coordinates of a cycle in the fundamental-cycle basis."""
        h = np.asarray(h)
        return np.array([h[..., u, v] for u, v in self.cotree_edges], dtype=np.int64).T


def spanning_tree(g: WeightedGraph) -> list[tuple[int, int]]:
    """BFS tree rooted at vertex 0, as (parent, child) pairs."""
    seen = {0}
    queue = deque([0])
    tree = []
    while queue:
        x = queue.popleft()
        for y in g.neighbours(x):
            if y not in seen:
                seen.add(y)
                tree.append((x, y))
                queue.append(y)
    return tree


def _tree_path(tree, n, a, b):
    parent = [-1] * n
    for p, c in tree:
        parent[c] = p

    def to_root(v):
        out = [v]
        while parent[out[-1]] != -1:
            out.append(parent[out[-1]])
        return out

    pa, pb = to_root(a), to_root(b)
    common = set(pa) & set(pb)
    ia = next(i for i, v in enumerate(pa) if v in common)
    ib = next(i for i, v in enumerate(pb) if v in common)
    return pa[: ia + 1] + pb[:ib][::-1]


def harmonic_basis(g: WeightedGraph) -> HarmonicBasis:
    """Harmonic forms ``omega_i`` with ``omega_i(gamma_j) = delta_ij``.

    For each co-tree edge the indicator form is projected onto harmonic forms
    by subtracting ``df``, where ``f`` solves the weighted Laplace equation;
    exact forms have zero holonomy, so the duality with the fundamental
    cycles survives the projection.
    """
    n = g.n
    tree = spanning_tree(g)
    tree_set = {(min(a, b), max(a, b)) for a, b in tree}
    cotree = [e for e in g.unordered_edges if e not in tree_set]
    C = g.conductance
    lap = np.diag(C.sum(axis=1)) - C
    cycles, forms = [], []
    for u, v in cotree:
        # fundamental cycle: u -> v then back along the tree from v to u
        path = [u] + _tree_path(tree, n, v, u)
        cyc = np.zeros((n, n), dtype=np.int64)
        for a, b in zip(path, path[1:]):
            cyc[a, b] += 1
            cyc[b, a] -= 1
        cycles.append(cyc)
        a = np.zeros((n, n))
        a[u, v], a[v, u] = 1.0, -1.0
        div = (C * a).sum(axis=1)
        f = np.linalg.lstsq(lap, div, rcond=None)[0]
        df = (f[:, None] - f[None, :]) * (C > 0)
        forms.append(a - df)
    return HarmonicBasis(tuple(tree), tuple(cotree), tuple(cycles), tuple(forms))


def harmonic_residual(g: WeightedGraph, omega) -> float:
    """``max_x |sum_y C_xy omega_xy|``."""
    return float(np.max(np.abs((g.conductance * np.asarray(omega)).sum(axis=1))))


def pairing(h, omega) -> float:
    """``<h, omega> = (1/2) sum_{x,y} h_xy omega_xy``."""
    return 0.5 * float((np.asarray(h) * np.asarray(omega)).sum())


def holonomy(omega, loop: Sequence[int]) -> float:
    omega = np.asarray(omega)
    return float(sum(omega[loop[i], loop[(i + 1) % len(loop)]] for i in range(len(loop))))


# -- characteristic function on the torus ---------------------------------

def _grid_points(rank, m):
    axes = [np.arange(m) / m] * rank
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.ravel() for a in mesh], axis=-1)


def det_ratio_on_grid(g: WeightedGraph, basis: HarmonicBasis, m: int) -> np.ndarray:
    """``det G^(2 pi i omega(t)) / det G`` on the uniform ``m^r`` grid.

    The twisted energy matrices are Hermitian positive definite, so the ratio
    is real and positive; an imaginary residue above 1e-9 raises.
    """
    r = basis.rank
    if r > MAX_TORUS_DIM:
        raise ValueError(f"torus dimension {r} exceeds {MAX_TORUS_DIM}")
    pts = _grid_points(r, m)
    forms = np.stack(basis.forms) if r else np.zeros((0, g.n, g.n))
    omegas = np.einsum("pi,ixy->pxy", pts, forms)
    lam = np.diag(energy_matrix(g)).copy()
    Q = np.diag(lam)[None].astype(complex) - g.conductance[None] * np.exp(2j * np.pi * omegas)
    dets = np.linalg.det(Q)
    base = np.linalg.det(energy_matrix(g))
    if np.max(np.abs(dets.imag)) > 1e-9 * np.max(np.abs(dets.real)):
        raise ArithmeticError("twisted determinant is not real")
    if np.any(dets.real <= 0):
        raise ArithmeticError("twisted determinant is not positive")
    return (base / dets.real).reshape([m] * r)


def _check_grid(coords, m):
    if np.any(2 * np.abs(coords) >= m):
        raise ValueError(f"grid of size {m} aliases class {tuple(coords)}; use m > {2 * int(np.max(np.abs(coords)))}")


def homology_pmf(g: WeightedGraph, alpha: float, j, m: int = 64, basis: HarmonicBasis | None = None) -> float:
    """``P(homology class of N^(alpha) = j)`` by quadrature on the torus.

    ``j`` is either an antisymmetric integer array or a vector of coordinates
    in the fundamental-cycle basis.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    basis = harmonic_basis(g) if basis is None else basis
    coords = _class_coordinates(basis, j)
    if basis.rank == 0:
        return 1.0 if coords.size == 0 or not np.any(coords) else 0.0
    _check_grid(coords, m)
    F = det_ratio_on_grid(g, basis, m) ** alpha
    pts = _grid_points(basis.rank, m)
    phase = np.exp(-2j * np.pi * (pts @ coords))
    val = np.sum(F.ravel() * phase) / m**basis.rank
    if abs(val.imag) > 1e-9:
        raise ArithmeticError(f"imaginary residue {val.imag:.3g} in Fourier inversion")
    return float(val.real)


def _class_coordinates(basis, j):
    j = np.asarray(j)
    if j.ndim == 2:
        if not np.array_equal(j, -j.T):
            raise ValueError("homology class must be antisymmetric")
        return basis.coordinates(j)
    return j.astype(np.int64).reshape(basis.rank)


def homology_pmf_table(g: WeightedGraph, alpha: float, m: int = 64, basis: HarmonicBasis | None = None) -> dict[tuple[int, ...], float]:
    """Probabilities of all classes with coordinates in ``(-m/2, m/2)``, via FFT."""
    basis = harmonic_basis(g) if basis is None else basis
    r = basis.rank
    if r == 0:
        return {(): 1.0}
    F = det_ratio_on_grid(g, basis, m) ** alpha
    coef = np.fft.fftn(F) / m**r
    out = {}
    half = (m - 1) // 2
    for idx in np.ndindex(*([m] * r)):
        c = tuple(i if i <= half else i - m for i in idx)
        if max(abs(v) for v in c) <= half:
            out[c] = float(coef[idx].real)
    return out


def homology_grid_error(g: WeightedGraph, alpha: float, j, m: int = 64) -> float:
    """``|pmf(m) - pmf(2m)|``, the grid-doubling stability of the quadrature."""
    basis = harmonic_basis(g)
    return abs(homology_pmf(g, alpha, j, m, basis) - homology_pmf(g, alpha, j, 2 * m, basis))


def characteristic_function(g: WeightedGraph, alpha: float, omega) -> float:
    """``[det G^(2 pi i omega) / det G]^alpha`` at one form."""
    d = np.linalg.det(twisted_energy(g, omega))
    base = np.linalg.det(energy_matrix(g))
    return float((base / d.real) ** alpha)


# -- covariance of the homology field -------------------------------------

def homology_covariance_wick(g: WeightedGraph, e1, e2) -> float:
    """``Cov(N_check_{e1}, N_check_{e2})`` at ``alpha = 1`` from Gaussian moments.

    Expands ``N_check_xy = N_xy - N_yx`` into products of oriented jump counts;
    each mixed moment is a factorial moment obtained from complex Wick
    pairings (see :mod:`loopnet.wick`).
    """
    from .wick import jump_moment

    (x, y), (u, v) = e1, e2
    terms = [((x, y), (u, v), 1), ((x, y), (v, u), -1), ((y, x), (u, v), -1), ((y, x), (v, u), 1)]
    total = 0.0
    for a, b, s in terms:
        if a == b:
            # E N^2 = E N(N-1) + E N
            total += s * (jump_moment(g, [a, a]) + jump_moment(g, [a]))
        else:
            total += s * jump_moment(g, [a, b])
    # the class is centred, so the second moment is the covariance
    return total


def homology_covariance_mc(networks: np.ndarray, e1, e2) -> tuple[float, float]:
    """Sample covariance of two homology coordinates and its standard error."""
    (x, y), (u, v) = e1, e2
    a = networks[:, x, y] - networks[:, y, x]
    b = networks[:, u, v] - networks[:, v, u]
    prod = (a - a.mean()) * (b - b.mean())
    n = len(prod)
    return float(prod.sum() / (n - 1)), float(prod.std(ddof=1) / math.sqrt(n))
