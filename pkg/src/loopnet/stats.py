"""Statistical helpers shared by the checks and the acceptance suite.

Monte Carlo means with standard errors, chi-square goodness of fit with
cell pooling, contingency-table independence tests and the two-sample
Kolmogorov-Smirnov test.  The heavy lifting is done by scipy.stats; this
module fixes the pooling policy and the report shapes.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

P_THRESHOLD = 1e-3
SE_FACTOR = 3.0
MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    n: int

    def within(self, target: float, k: float = SE_FACTOR, atol: float = 0.0) -> bool:
        """``|mean - target| <= k * se + atol``."""
        return bool(abs(self.mean - target) <= k * self.se + atol)


def mc_mean(values: Iterable[float]) -> McEstimate:
    """Sample mean and its standard error ``std / sqrt(n)``."""
    a = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    n = a.size
    if n < 2:
        raise ValueError("need at least two samples")
    return McEstimate(float(a.mean()), float(a.std(ddof=1) / math.sqrt(n)), n)


def mc_difference(a: McEstimate, b: McEstimate) -> tuple[float, float]:
    """Difference of two independent estimates and its standard error."""
    return a.mean - b.mean, math.hypot(a.se, b.se)


@dataclass
class GofReport:
    statistic: float
    dof: int
    p_value: float
    observed: list = field(default_factory=list)
    expected: list = field(default_factory=list)
    pooling: str = ""

    @property
    def passed(self) -> bool:
        return self.p_value > P_THRESHOLD

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("observed")
        d.pop("expected")
        d["cells"] = len(self.observed)
        return d


def _pool(observed, expected, labels):
    """Merge cells with expected count below ``MIN_EXPECTED``.

    Cells are sorted by expected count; small ones are accumulated into a
    single pooled cell, which is itself merged into the smallest retained
    cell if it is still too small.
    """
    order = np.argsort(expected, kind="stable")
    keep_o, keep_e, keep_l = [], [], []
    pool_o = pool_e = 0.0
    pooled = 0
    for i in order:
        if expected[i] < MIN_EXPECTED:
            pool_o += observed[i]
            pool_e += expected[i]
            pooled += 1
        else:
            keep_o.append(float(observed[i]))
            keep_e.append(float(expected[i]))
            keep_l.append(labels[i])
    if pooled:
        if pool_e >= MIN_EXPECTED or not keep_e:
            keep_o.append(pool_o)
            keep_e.append(pool_e)
            keep_l.append("pooled")
        else:
            keep_o[0] += pool_o
            keep_e[0] += pool_e
            keep_l[0] = "pooled"
    return np.array(keep_o), np.array(keep_e), keep_l, pooled


def chi_square_gof(
    observed: Mapping | Sequence[float],
    pmf: Mapping | Sequence[float],
    n: int | None = None,
    tail: bool = True,
) -> GofReport:
    """Goodness of fit of counts against an exact pmf.

    ``observed`` and ``pmf`` are either aligned sequences or dictionaries
    keyed by outcome (missing observed keys count as zero; observed keys
    absent from ``pmf`` go to the tail cell).  With ``tail=True`` the mass
    ``1 - sum(pmf)`` is a separate cell collecting every unlisted outcome.
    """
    if isinstance(pmf, Mapping):
        keys = list(pmf)
        probs = np.array([pmf[k] for k in keys], dtype=float)
        obs_map = dict(observed) if isinstance(observed, Mapping) else dict(zip(keys, observed))
        obs = np.array([obs_map.get(k, 0) for k in keys], dtype=float)
        total = sum(obs_map.values()) if n is None else n
        labels = [str(k) for k in keys]
    else:
        probs = np.asarray(pmf, dtype=float)
        obs = np.asarray(observed, dtype=float)
        total = obs.sum() if n is None else n
        labels = [str(i) for i in range(len(probs))]
    if tail:
        rest = max(0.0, 1.0 - probs.sum())
        probs = np.append(probs, rest)
        obs = np.append(obs, total - obs.sum())
        labels.append("tail")
    expected = probs * total
    o, e, lab, pooled = _pool(obs, expected, labels)
    if len(o) < 2:
        return GofReport(0.0, 0, 1.0, o.tolist(), e.tolist(), f"pooled {pooled} cells")
    # rescale so the expected table sums to the observed total exactly
    e = e * o.sum() / e.sum()
    stat = float(((o - e) ** 2 / e).sum())
    dof = len(o) - 1
    return GofReport(stat, dof, float(sps.chi2.sf(stat, dof)), o.tolist(), e.tolist(), f"pooled {pooled} cells")


def two_sample_chi_square(a: Mapping, b: Mapping) -> GofReport:
    """Homogeneity test of two count tables keyed by outcome.

    Outcomes are pooled (by combined count) until every expected cell of the
    2 x K table is at least ``MIN_EXPECTED``.
    """
    keys = sorted(set(a) | set(b), key=str)
    table = np.array([[a.get(k, 0) for k in keys], [b.get(k, 0) for k in keys]], dtype=float)
    na, nb = table.sum(axis=1)
    frac = min(na, nb) / (na + nb)
    tot = table.sum(axis=0)
    small = tot * frac < MIN_EXPECTED
    cols = [table[:, ~small]]
    pooled = int(small.sum())
    if pooled:
        cols.append(table[:, small].sum(axis=1, keepdims=True))
    t = np.concatenate(cols, axis=1)
    if t.shape[1] >= 2 and t[:, -1].sum() * frac < MIN_EXPECTED:
        t = np.concatenate([t[:, :-2], t[:, -2:].sum(axis=1, keepdims=True)], axis=1)
    if t.shape[1] < 2:
        return GofReport(0.0, 0, 1.0, t.tolist(), [], f"pooled {pooled} cells")
    stat, p, dof, exp = sps.chi2_contingency(t, correction=False)
    return GofReport(float(stat), int(dof), float(p), t.tolist(), exp.tolist(), f"pooled {pooled} cells")


def _merge_sparse(t):
    """Merge the lightest row or column into its lighter neighbour until
    every expected count reaches ``MIN_EXPECTED``."""
    merged = 0
    while t.shape[0] >= 2 and t.shape[1] >= 2:
        exp = np.outer(t.sum(axis=1), t.sum(axis=0)) / t.sum()
        if exp.min() >= MIN_EXPECTED:
            break
        rows, cols = t.sum(axis=1), t.sum(axis=0)
        axis = 0 if rows.min() <= cols.min() else 1
        m = t if axis == 0 else t.T
        margins = m.sum(axis=1)
        i = int(np.argmin(margins))
        if i == 0:
            j = 1
        elif i == len(margins) - 1:
            j = i - 1
        else:
            j = i - 1 if margins[i - 1] <= margins[i + 1] else i + 1
        m = m.copy()
        m[j] += m[i]
        m = np.delete(m, i, axis=0)
        t = m if axis == 0 else m.T
        merged += 1
    return t, merged


def independence_test(table) -> GofReport:
    """Pearson chi-square test of independence for a contingency table.

    Empty rows and columns are dropped; sparse ones are merged with a
    neighbour (rows and columns are assumed ordered) so that every expected
    count is at least ``MIN_EXPECTED``.
    """
    t = np.asarray(table, dtype=float)
    t = t[t.sum(axis=1) > 0][:, t.sum(axis=0) > 0]
    t, merged = _merge_sparse(t)
    if t.shape[0] < 2 or t.shape[1] < 2:
        return GofReport(0.0, 0, 1.0, t.tolist(), [], "degenerate table")
    stat, p, dof, exp = sps.chi2_contingency(t, correction=False)
    return GofReport(float(stat), int(dof), float(p), t.tolist(), exp.tolist(), f"merged {merged} rows/columns")


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and p-value."""
    res = sps.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(res.statistic), float(res.pvalue)


def count_table(keys: Iterable) -> dict:
    out: dict = {}
    for k in keys:
        out[k] = out.get(k, 0) + 1
    return out


@dataclass
class CheckReport:
    """Outcome of comparing a Monte Carlo estimate with an exact value."""

    identity: str
    lhs: float
    rhs: float
    se: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"identity": self.identity, "lhs": self.lhs, "rhs": self.rhs, "se": self.se, "pass": self.passed, **self.details}


def compare(identity: str, est: McEstimate, exact: float, k: float = SE_FACTOR, atol: float = 0.0, **details) -> CheckReport:
    return CheckReport(identity, est.mean, float(exact), est.se, est.within(exact, k, atol), dict(details))
