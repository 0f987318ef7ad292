"""The acceptance suite: twelve checks of samplers against exact laws.

Each ``criterion_*`` function runs one group of checks and returns a
:class:`CriterionResult`.  Sample sizes scale linearly with ``scale``
(``scale=1`` is the full size; smaller values give a quick smoke run whose
statistical verdicts are still meaningful but less powerful).  Checks that
are reported for information only, and are expected to fail, are kept in
``informational`` and never affect the verdict.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import configurations as cfg
from . import fields, maps
from .graph import (
    WeightedGraph,
    complete_graph,
    det_I_minus_P,
    duality_measure,
    green_function,
    log_det_I_minus_P,
    path_graph,
    triangle,
    two_vertex,
)
from .homology import harmonic_basis, homology_grid_error, homology_pmf
from .loops import (
    DiscreteLoop,
    expected_loop_count,
    occupation_field,
    sample_networks,
    wilson_networks,
)
from .networks import (
    bessel_I,
    class_of_flow,
    enumerate_eulerian,
    enumerate_even,
    flow_of,
    flow_probability,
    homology_class,
    network_key,
    pmf_eulerian,
    pmf_even,
    quasi_invariance_check,
    symmetrize,
)
from .stats import (
    P_THRESHOLD,
    SE_FACTOR,
    chi_square_gof,
    count_table,
    independence_test,
    mc_mean,
    two_sample_chi_square,
)

GOF_MAX_TOTAL = 6


@dataclass
class CriterionResult:
    test_id: int
    statement: str
    passed: bool
    details: list = field(default_factory=list)
    informational: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        n_ok = sum(1 for d in self.details if d["pass"])
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.test_id:2d}: {self.statement} ({n_ok}/{len(self.details)} checks, {self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "statement": self.statement,
            "pass": self.passed,
            "details": self.details,
            "informational": self.informational,
        }


def _n(base: int, scale: float, minimum: int = 2000) -> int:
    return max(minimum, int(round(base * scale)))


def _finish(test_id, statement, details, t0, informational=None):
    return CriterionResult(test_id, statement, all(d["pass"] for d in details), details, informational or [], time.time() - t0)


def _mean_check(name, values, exact, **extra):
    est = mc_mean(values)
    return {"check": name, "mc": est.mean, "se": est.se, "exact": float(exact), "pass": est.within(exact), **extra}


def _gof_check(name, report, **extra):
    return {"check": name, "p_value": report.p_value, "statistic": report.statistic, "dof": report.dof, "pass": report.passed, **extra}


def perturbed(g: WeightedGraph, factor: float = 1.25) -> WeightedGraph:
    """Same graph with the first edge's conductance multiplied by ``factor``."""
    (u, v, c), *rest = g.edges
    return WeightedGraph(g.n, ((u, v, c * factor), *rest), g.killing, name=g.name)


# -- 1 --------------------------------------------------------------------

def criterion_normalization(scale: float = 1.0, seed: int = 1) -> CriterionResult:
    t0 = time.time()
    g = two_vertex()
    out = []
    # Eulerian law: networks m (a->b) + m (b->a); exact geometric tail (1/4)^(M+1)
    M = 20
    total = sum(pmf_eulerian(g, k) for k in enumerate_eulerian(g, 2 * M))
    tail = 0.25 ** (M + 1)
    out.append({"check": "Eulerian pmf sums to one", "sum": total, "tail": tail, "error": abs(total + tail - 1), "pass": abs(total + tail - 1) < 1e-9})
    # even law: sum_j C(2j, j) 16^-j = (3/4)^(-1/2); terms are below 4^-j
    J = 30
    total = sum(pmf_even(g, k) for k in enumerate_even(g, 2 * J))
    bound = math.sqrt(0.75) * 4.0 ** (-J) / 3
    out.append({"check": "even pmf sums to one", "sum": total, "tail_bound": bound, "pass": 0 <= 1 - total <= bound + 1e-12})
    # configuration measures, two-vertex graph with at most 4 exits per vertex
    qs = sum(cfg.q_probability(g, c) for c in cfg.enumerate_configurations(g, 4))
    tail = 0.25 ** 5
    out.append({"check": "Q sums to one", "sum": qs, "tail": tail, "error": abs(qs + tail - 1), "pass": abs(qs + tail - 1) < 1e-9})
    qe = 0.0
    J = 4
    for j in range(J + 1):
        qe += sum(cfg.q_even_probability(g, c) for c in cfg.even_configurations_with_counts(g, (j, j)))
    bound = math.sqrt(0.75) * 4.0 ** (-J) / 3
    out.append({"check": "even Q sums to one", "sum": qe, "tail_bound": bound, "pass": 0 <= 1 - qe <= bound})
    # triangle: enumerated mass to total 12; the remainder is compared with
    # the sampled frequency of larger networks
    t = triangle()
    mass = sum(pmf_eulerian(t, k) for k in enumerate_eulerian(t, 12))
    n = _n(200_000, scale)
    big = sample_networks(t, 1.0, n, seed=seed).networks.sum(axis=(1, 2)) > 12
    d = _mean_check("triangle Eulerian remainder beyond total 12", big, 1 - mass, enumerated=mass)
    d["pass"] = d["pass"] and mass <= 1 + 1e-12
    out.append(d)
    return _finish(1, "exact laws and configuration measures are normalised", out, t0)


# -- 2 --------------------------------------------------------------------

def _network_pmf_table(g, even, max_total=GOF_MAX_TOTAL):
    if even:
        return {network_key(k): pmf_even(g, k) for k in enumerate_even(g, max_total)}
    return {network_key(k): pmf_eulerian(g, k) for k in enumerate_eulerian(g, max_total)}


def row_counts(arr) -> dict:
    """Counts of distinct arrays along the first axis, keyed by flattened tuple."""
    flat = np.asarray(arr).reshape(len(arr), -1)
    if len(flat) == 0:
        return {}
    rows, counts = np.unique(flat, axis=0, return_counts=True)
    return {tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)}


def _network_counts(nets, even):
    return row_counts(symmetrize(nets) if even else nets)


def criterion_network_laws(scale: float = 1.0, seed: int = 2, exact_graph: Callable | None = None) -> CriterionResult:
    t0 = time.time()
    n = _n(1_000_000, scale)
    out = []
    for gi, g in enumerate((two_vertex(), triangle())):
        ge = exact_graph(g) if exact_graph else g
        for ai, (alpha, even) in enumerate(((1.0, False), (0.5, True))):
            nets = sample_networks(g, alpha, n, seed=seed * 100 + gi * 10 + ai).networks
            rep = chi_square_gof(_network_counts(nets, even), _network_pmf_table(ge, even), n=n)
            out.append(_gof_check(f"{g.name} alpha={alpha} network law", rep, samples=n))
    return _finish(2, "sampled networks follow the exact Eulerian and even laws", out, t0)


# -- 3 --------------------------------------------------------------------

def criterion_moments(scale: float = 1.0, seed: int = 3, exact_graph: Callable | None = None) -> CriterionResult:
    t0 = time.time()
    n = _n(200_000, scale)
    out = []
    for gi, g in enumerate((two_vertex(), triangle())):
        ge = exact_graph(g) if exact_graph else g
        G = green_function(ge)
        C = ge.conductance
        for alpha in (1.0, 0.5):
            rng = np.random.default_rng(seed * 100 + gi * 10 + int(alpha * 2))
            batch = sample_networks(g, alpha, n, seed=rng)
            for x, y in g.oriented_edges:
                out.append(_mean_check(f"{g.name} alpha={alpha} E N[{x},{y}]", batch.networks[:, x, y], alpha * C[x, y] * G[x, y]))
            occ = occupation_field(g, batch.networks, alpha, rng)
            for x in range(g.n):
                out.append(_mean_check(f"{g.name} alpha={alpha} E occupation[{x}]", occ[:, x], alpha * G[x, x]))
            out.append(_mean_check(f"{g.name} alpha={alpha} E loop count", batch.loop_counts, expected_loop_count(ge, alpha)))
    return _finish(3, "first moments of jumps, occupation field and loop count", out, t0)


# -- 4 --------------------------------------------------------------------

def criterion_wilson(scale: float = 1.0, seed: int = 4) -> CriterionResult:
    t0 = time.time()
    n = _n(200_000, scale)
    out = []
    for gi, g in enumerate((two_vertex(), triangle())):
        w = wilson_networks(g, n, seed=seed * 10 + gi)
        b = sample_networks(g, 1.0, n, seed=seed * 10 + gi + 5).networks
        rep = two_sample_chi_square(_network_counts(w, False), _network_counts(b, False))
        out.append(_gof_check(f"{g.name} Wilson vs bridge sampler", rep, samples=n))
        if g.n == 3:
            rev = wilson_networks(g, n, seed=seed * 10 + 7, vertex_order=[2, 0, 1])
            rep = two_sample_chi_square(_network_counts(rev, False), _network_counts(b, False))
            out.append(_gof_check(f"{g.name} Wilson (order 2,0,1) vs bridge sampler", rep, samples=n))
    return _finish(4, "Wilson-type construction and bridge sampler agree in law", out, t0)


# -- 5 --------------------------------------------------------------------

def _coefficient_agreement(name, counts, coefs):
    bad = [m for m in counts if Fraction(counts[m]) != coefs[m]]
    return {"check": name, "monomials": len(counts), "mismatches": len(bad), "pass": not bad}


def criterion_configurations(scale: float = 1.0, seed: int = 5) -> CriterionResult:
    t0 = time.time()
    out = []
    for g in (two_vertex(), triangle(), complete_graph(4)):
        nets = list(enumerate_eulerian(g, 4))
        bad = [network_key(k) for k in nets if cfg.multiplicity(k) != cfg.preimage_count(g, k)]
        out.append({"check": f"{g.name} multiplicity = preimage count, totals <= 4", "networks": len(nets), "pass": not bad})
        evs = list(enumerate_even(g, 4))
        bad = [network_key(k) for k in evs if cfg.even_multiplicity(k) != cfg.even_preimage_count(g, k)]
        out.append({"check": f"{g.name} even multiplicity = preimage count, totals <= 4", "networks": len(evs), "pass": not bad})
    info = []
    cases = ((two_vertex(), (4, 4)), (triangle(), (3, 3, 2)), (complete_graph(4), (2, 2, 2, 2)))
    for g, caps in cases:
        for method in ("recursion", "permanent"):
            counts, coefs = cfg.config_generating_check(g, caps, method)
            out.append(_coefficient_agreement(f"{g.name} configuration series, {method} counts, caps {caps}", counts, coefs))
        counts, coefs = cfg.even_generating_check(g, caps, 2)
        out.append(_coefficient_agreement(f"{g.name} even series det(1 - 2 s A)^(-1/2), caps {caps}", counts, coefs))
        # the half-scaled variable gives rational, non-integer coefficients
        _, half = cfg.even_generating_check(g, caps, Fraction(1, 2))
        d = _coefficient_agreement(f"{g.name} even series det(1 - s A / 2)^(-1/2), caps {caps}", counts, half)
        d["expected_failure"] = True
        info.append(d)
    small = ((two_vertex(), (3, 3)), (triangle(), (2, 2, 1)))
    for g, caps in small:
        counts, coefs = cfg.config_generating_check(g, caps, "enumeration")
        out.append(_coefficient_agreement(f"{g.name} configuration series, explicit enumeration, caps {caps}", counts, coefs))
        counts, coefs = cfg.even_generating_check(g, (2,) * g.n if g.n == 2 else (1, 1, 1), 2, "enumeration")
        out.append(_coefficient_agreement(f"{g.name} even series, explicit enumeration", counts, coefs))
    return _finish(5, "configuration counts match multiplicities and generating functions", out, t0, info)


# -- 6 --------------------------------------------------------------------

def criterion_maps(scale: float = 1.0, seed: int = 6) -> CriterionResult:
    t0 = time.time()
    out = []
    for d in range(2, 7):
        for kappa in (0.5, 1.0, 2.0):
            a = maps.expected_chi(complete_graph(d, kappa))
            b = maps.complete_graph_expected_chi(d, kappa)
            out.append({"check": f"E chi closed form K{d} kappa={kappa}", "general": a, "closed": b, "pass": abs(a - b) < 1e-10})
            a = maps.expected_essential_vertices(complete_graph(d, kappa))
            b = maps.complete_graph_essential_vertices(d, kappa)
            out.append({"check": f"essential vertices closed form K{d} kappa={kappa}", "general": a, "closed": b, "pass": abs(a - b) < 1e-10})
    n = _n(100_000, scale)
    for gi, g in enumerate((triangle(), complete_graph(4))):
        rng = np.random.default_rng(seed * 10 + gi)
        confs = cfg.sample_configurations(g, n, rng)
        chis = np.empty(n)
        nplus = np.empty(n)
        nminus = np.empty(n)
        invariant_ok = True
        faces_ok = True
        plus_nets = np.empty((n, g.n, g.n), dtype=np.int64)
        occupied = np.empty(n)
        essential = np.empty(n)
        for r, c in enumerate(confs):
            m = maps.build_map(c)
            fs = maps.face_sets(c)
            chi = m.n_vertices + len(fs.plus) + len(fs.minus) - m.n_edges
            genus = maps.genus_per_component(c)
            if chi % 2 or chi != sum(2 - 2 * q for q in genus) or chi > 2 * len(genus) or min(genus, default=0) < 0:
                invariant_ok = False
            k = c.network()
            pn = fs.network_plus(g.n)
            if not (np.array_equal(pn, k) and np.array_equal(fs.network_minus(g.n), k.T)):
                faces_ok = False
            chis[r] = chi
            nplus[r] = len(fs.plus)
            nminus[r] = len(fs.minus)
            plus_nets[r] = pn
            counts = np.array(c.counts)
            occupied[r] = np.count_nonzero(counts)
            essential[r] = np.count_nonzero(counts > 1)
        out.append(_mean_check(f"{g.name} mean chi", chis, maps.expected_chi(g), samples=n))
        out.append({"check": f"{g.name} chi even, equals sum over components of 2 - 2 genus", "pass": invariant_ok})
        out.append({"check": f"{g.name} L+ carries the network, L- its reverse", "pass": faces_ok})
        out.append(_mean_check(f"{g.name} mean |L+|", nplus, -log_det_I_minus_P(g)))
        out.append(_mean_check(f"{g.name} mean |L-|", nminus, -log_det_I_minus_P(g)))
        out.append(_mean_check(f"{g.name} mean occupied vertices", occupied, maps.occupied_vertex_expectation(g)))
        out.append(_mean_check(f"{g.name} mean essential vertices", essential, maps.expected_essential_vertices(g)))
        if g.n == 3:
            rep = chi_square_gof(_network_counts(plus_nets, False), _network_pmf_table(g, False), n=n)
            out.append(_gof_check(f"{g.name} L+ network law", rep, samples=n))
            # loop multisets of L+ against independent soups (bridge sampler)
            soups = _soup_loop_multisets(g, n, seed * 10 + 9)
            faces = count_table(tuple(sorted(DiscreteLoop.from_sequence(f) for f in maps.face_sets(c).plus)) for c in confs)
            rep = two_sample_chi_square(faces, soups)
            out.append(_gof_check(f"{g.name} L+ loop multiset vs loop soup", rep, samples=n))
            enter_first = np.array([maps.euler_characteristic(c, exit_first=False) for c in confs])
            rep = two_sample_chi_square(count_table(chis.astype(int).tolist()), count_table(enter_first.tolist()))
            out.append(_gof_check(f"{g.name} chi law independent of rotation convention", rep, samples=n))
    return _finish(6, "maps: Euler characteristic, genus and face laws", out, t0)


def _soup_loop_multisets(g, n, seed):
    from .loops import sample_ensembles

    return count_table(e.counter() for e in sample_ensembles(g, 1.0, n, seed=seed))


# -- 7 --------------------------------------------------------------------

def _class_freq_check(name, count, n, p):
    freq = count / n
    se = math.sqrt(max(p * (1 - p), 0.0) / n)
    return {"check": name, "mc": freq, "exact": p, "se": se, "pass": abs(freq - p) <= SE_FACTOR * se + 1e-15}


def criterion_homology(scale: float = 1.0, seed: int = 7) -> CriterionResult:
    t0 = time.time()
    out = []
    g = triangle()
    basis = harmonic_basis(g)
    pm = {w: homology_pmf(g, 1.0, [w], 64, basis) for w in range(-6, 7)}
    total = sum(pm.values())
    out.append({"check": "class probabilities |w| <= 6 sum to one", "sum": total, "pass": total >= 1 - 1e-6 and total <= 1 + 1e-9})
    for w in (0, 1, 2):
        err = homology_grid_error(g, 1.0, [w], 64)
        out.append({"check": f"grid doubling at class {w}", "difference": err, "pass": err < 1e-8})
    n = _n(1_000_000, scale)
    nets = sample_networks(g, 1.0, n, seed=seed).networks
    coords = basis.coordinates(homology_class(nets))[:, 0]
    counts = count_table(coords.tolist())
    for w in range(-6, 7):
        out.append(_class_freq_check(f"class {w} frequency, alpha=1", counts.get(w, 0), n, pm[w]))
    # half intensity on the same torus
    nets = sample_networks(g, 0.5, n, seed=seed + 1).networks
    coords = basis.coordinates(homology_class(nets))[:, 0]
    counts = count_table(coords.tolist())
    for w in range(-3, 4):
        p = homology_pmf(g, 0.5, [w], 64, basis)
        out.append(_class_freq_check(f"class {w} frequency, alpha=1/2", counts.get(w, 0), n, p))
    return _finish(7, "homology class law from the torus integral", out, t0)


# -- 8 --------------------------------------------------------------------

def criterion_flows(scale: float = 1.0, seed: int = 8) -> CriterionResult:
    import mpmath

    t0 = time.time()
    out = []
    worst = 0.0
    for nu in range(0, 7):
        for x in (0.0, 0.05, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0):
            ref = float(mpmath.besseli(nu, x))
            val = bessel_I(nu, x)
            err = abs(val - ref) / max(abs(ref), 1e-300) if ref else abs(val)
            worst = max(worst, err)
    out.append({"check": "Bessel series vs arbitrary-precision oracle", "max_rel_error": worst, "pass": worst < 1e-12})
    g = triangle()
    basis = harmonic_basis(g)
    cyc = basis.cycles[0]
    n = _n(1_000_000, scale)
    nets = sample_networks(g, 1.0, n, seed=seed).networks
    classes = homology_class(nets)
    flows = flow_of(classes)
    out.append({"check": "flow of class round-trips", "pass": bool(np.array_equal(class_of_flow(flows), classes))})
    keys = row_counts(flows)
    total = 0.0
    for w in range(-4, 5):
        h = flow_of(w * cyc)
        p = flow_probability(g, h)
        total += p
        out.append(_class_freq_check(f"flow {w} x cycle", keys.get(network_key(h), 0), n, p))
    out.append({"check": "flow probabilities |w| <= 4 sum to one", "sum": total, "pass": abs(total - 1) < 1e-3})
    return _finish(8, "flow law from the Bessel density", out, t0)


# -- 9 --------------------------------------------------------------------

def _random_s(g, rng, complex_s):
    s = np.zeros((g.n, g.n), dtype=complex if complex_s else float)
    if complex_s:
        for x, y in g.oriented_edges:
            s[x, y] = rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
    else:
        for x, y in g.unordered_edges:
            s[x, y] = s[y, x] = rng.uniform(0, 1)
    return s


def _report_dict(rep, **extra):
    d = rep.to_dict()
    d["check"] = d.pop("identity")
    d.update(extra)
    return d


def criterion_field_identities(scale: float = 1.0, seed: int = 9) -> CriterionResult:
    t0 = time.time()
    out = []
    info = []
    n = _n(100_000, scale)
    rng = np.random.default_rng(seed)
    for g in (two_vertex(), triangle(), complete_graph(4)):
        for i in range(5):
            s = _random_s(g, rng, True)
            chi = rng.uniform(0, 1, g.n)
            rep = fields.identity_eq1_check(g, s, chi, n, seed=rng)
            out.append(_report_dict(rep, graph=g.name, instance=i))
            s = _random_s(g, rng, False)
            chi = rng.uniform(0, 1, g.n)
            rep = fields.identity_eq2_check(g, s, chi, n, seed=rng)
            out.append(_report_dict(rep, graph=g.name, instance=i))
    m = _n(400_000, scale)
    g2, t = two_vertex(), triangle()
    anchors = (
        (g2, [(0, 1), (1, 0)], [], False),
        (g2, [], [0], False),
        (g2, [(0, 1)], [1], False),
        (t, [(0, 1), (1, 2)], [2], False),
        (g2, [(0, 1)], [], True),
        (g2, [], [0, 1], True),
        (t, [(0, 1), (1, 2)], [], True),
        (t, [(0, 1)], [2], True),
    )
    for g, edges, verts, even in anchors:
        rep = fields.moment_identity_check(g, edges, verts, m, seed=rng, even=even)
        out.append(_report_dict(rep, graph=g.name, edges=[list(e) for e in edges], vertices=list(verts)))
    out[-8]["hand_value"] = 5 / 9
    for g in (two_vertex(), triangle(), complete_graph(4)):
        rep = fields.det_perm_identity_check(g, None, m, seed=rng)
        d = _report_dict(rep, graph=g.name)
        info.append({"check": f"{g.name} det(M_chi D_N - N) without 1/lam", "mc": d.pop("unnormalised_lhs"), "exact": d["rhs"], "pass": False, "expected_failure": True})
        out.append(d)
        rep = fields.det_perm_identity_check(g, None, m, seed=rng, even=True)
        out.append(_report_dict(rep, graph=g.name))
    return _finish(9, "generating functionals, moment and determinant identities", out, t0, info)


# -- 10 -------------------------------------------------------------------

def criterion_isomorphism(scale: float = 1.0, seed: int = 10) -> CriterionResult:
    t0 = time.time()
    out = []
    n = _n(100_000, scale)
    for gi, g in enumerate((two_vertex(), triangle())):
        for rep in fields.isomorphism_check(g, n, seed=seed * 10 + gi):
            out.append(_report_dict(rep, graph=g.name))
    return _finish(10, "occupation fields match half squared free fields", out, t0)


# -- 11 -------------------------------------------------------------------

MIN_CELL = 500


def criterion_markov(scale: float = 1.0, seed: int = 11) -> CriterionResult:
    t0 = time.time()
    out = []
    n = _n(1_000_000, scale)
    rng = np.random.default_rng(seed)
    # 3-path a-b-c cut between {a} and {b, c}; the occupation values are
    # binned by quantiles within each conditioning cell
    g = path_graph(3, kappa=0.5)
    nets = sample_networks(g, 1.0, n, seed=rng).networks
    occ = occupation_field(g, nets, 1.0, rng)
    left = occ[:, 0]
    right = (np.minimum(nets[:, 1, 2], 3), occ[:, 2])
    out.extend(_conditional_independence("3-path", nets[:, 0, 1], left, right))
    # 4-path a-b-c-d cut at {b, c}: jump counts on both sides
    g = path_graph(4, kappa=0.5)
    nets = sample_networks(g, 1.0, n, seed=rng).networks
    left = np.minimum(nets[:, 0, 1], 3)
    right = np.minimum(nets[:, 2, 3], 3)
    out.extend(_conditional_independence("4-path", nets[:, 1, 2], left, right))
    return _finish(11, "sides of a cut are independent given the crossing counts", out, t0)


def _quantile_bins(v, k):
    edges = np.quantile(v, np.arange(1, k) / k)
    return np.digitize(v, edges)


def _conditional_independence(name, cut, left, right):
    """Independence tests of left against right statistics per cut value.

    A real-valued statistic is split into within-cell quartiles (left) or
    terciles (the real part of a right-hand pair).
    """
    out = []
    for value in np.unique(cut):
        sel = cut == value
        hits = int(sel.sum())
        if hits < MIN_CELL:
            continue
        a = left[sel]
        a = _quantile_bins(a, 4) if a.dtype.kind == "f" else a
        if isinstance(right, tuple):
            cat, real = right
            b = cat[sel] * 3 + _quantile_bins(real[sel], 3)
        else:
            b = right[sel]
        table = np.zeros((int(a.max()) + 1, int(b.max()) + 1))
        np.add.at(table, (a, b), 1)
        rep = independence_test(table)
        out.append(_gof_check(f"{name} crossing count {int(value)}", rep, hits=hits))
    return out


# -- 12 -------------------------------------------------------------------

def criterion_quasi_invariance(scale: float = 1.0, seed: int = 12) -> CriterionResult:
    t0 = time.time()
    out = []
    n = _n(400_000, scale)
    cases = []
    g = two_vertex()
    k = np.array([[0, 1], [1, 0]])
    cases.append((g, k, "unit pair"))
    t = triangle()
    kc = np.zeros((3, 3), dtype=int)
    kc[0, 1] = kc[1, 2] = kc[2, 0] = 1
    cases.append((t, kc, "unit cycle"))
    for ci, (g, k, label) in enumerate(cases):
        a = sample_networks(g, 1.0, n, seed=seed * 10 + ci).networks
        b = sample_networks(g, 1.0, n, seed=seed * 10 + ci + 5).networks
        functionals = {
            "F = 1": lambda N: np.ones(len(N)),
            "F = 1{N = k}": lambda N, k=k: np.all(N == k, axis=(1, 2)).astype(float),
            "F = exp(-total jumps / 4)": lambda N: np.exp(-N.sum(axis=(1, 2)) / 4),
        }
        for fname, F in functionals.items():
            q = quasi_invariance_check(g, k, F, a, b)
            d = {"check": f"{g.name} {label}, {fname}", "lhs": q.lhs, "rhs": q.rhs, "se": q.se, "pass": abs(q.lhs - q.rhs) <= SE_FACTOR * q.se}
            if fname == "F = 1{N = k}":
                d["exact"] = det_I_minus_P(g)
                d["pass"] = d["pass"] and abs(q.lhs - d["exact"]) <= SE_FACTOR * q.se_lhs
            out.append(d)
    return _finish(12, "shifting the network by k reweights its law", out, t0)


CRITERIA = {
    1: criterion_normalization,
    2: criterion_network_laws,
    3: criterion_moments,
    4: criterion_wilson,
    5: criterion_configurations,
    6: criterion_maps,
    7: criterion_homology,
    8: criterion_flows,
    9: criterion_field_identities,
    10: criterion_isomorphism,
    11: criterion_markov,
    12: criterion_quasi_invariance,
}


def run_suite(scale: float = 1.0, only=None, perturb_expected: bool = False, log=None) -> list[CriterionResult]:
    """Run the selected criteria; ``perturb_expected`` feeds wrong exact values to 2 and 3."""
    results = []
    for cid, fn in CRITERIA.items():
        if only and cid not in only:
            continue
        kwargs = {"scale": scale}
        if perturb_expected and cid in (2, 3):
            kwargs["exact_graph"] = perturbed
        res = fn(**kwargs)
        results.append(res)
        if log:
            log(res.line())
    return results
