"""Marginal-distribution fidelity metrics.

Each metric compares one column of the real table against the same column of
the synthetic table: Kolmogorov-Smirnov statistic with an asymptotic p-value
for numerics, KL divergence (natural log) for categoricals, exact 1-D
Wasserstein distance, and categorical support coverage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import DEFAULT_BINS, assign_bins, edges_from_values
from .data import Dataset
from .errors import AllMissing, NotCategorical, SchemaMismatch

KL_SMOOTHING = 0.5   # pseudo-counts added when a real level is absent in synthetic


def _clean(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    return arr[~np.isnan(arr)]


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Asymptotic Kolmogorov survival function, truncated and clamped to [0,1]."""
    if lam <= 1e-8:
        return 1.0
    total = 0.0
    for j in range(1, terms + 1):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += term if j % 2 == 1 else -term
        if term < 1e-18:
            break
    return min(max(2.0 * total, 0.0), 1.0)


def ks_two_sample(real_values, syn_values):
    """Two-sample KS statistic (exact sup of ECDF difference) and p-value.

    The p-value uses the asymptotic two-sample Kolmogorov distribution with
    effective sample size n1*n2/(n1+n2).
    """
    a = np.sort(_clean(real_values))
    b = np.sort(_clean(syn_values))
    if len(a) == 0 or len(b) == 0:
        raise AllMissing("both samples need at least one non-missing value")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    stat = float(np.max(np.abs(fa - fb)))
    n_eff = len(a) * len(b) / (len(a) + len(b))
    p = kolmogorov_sf(math.sqrt(n_eff) * stat)
    return stat, p


def kl_divergence(real_counts, syn_counts) -> float:
    """KL divergence (nats) between two categorical count tables.

    When every real level also occurs in the synthetic table the raw
    proportions are used; otherwise 0.5 pseudo-counts are added to every level
    of the union (additive smoothing) so the divergence stays finite.
    """
    levels = sorted(set(real_counts) | set(syn_counts), key=str)
    r = np.array([float(real_counts.get(lv, 0)) for lv in levels])
    s = np.array([float(syn_counts.get(lv, 0)) for lv in levels])
    if r.sum() <= 0 or s.sum() <= 0:
        raise ValueError("count tables must each have positive total")
    if np.any((r > 0) & (s == 0)):
        r = r + KL_SMOOTHING
        s = s + KL_SMOOTHING
    p = r / r.sum()
    q = s / s.sum()
    mask = p > 0
    return max(0.0, float(np.sum(p[mask] * np.log(p[mask] / q[mask]))))


def wasserstein_1d(real_values, syn_values) -> float:
    """Exact first Wasserstein distance between two empirical distributions."""
    a = np.sort(_clean(real_values))
    b = np.sort(_clean(syn_values))
    if len(a) == 0 or len(b) == 0:
        raise AllMissing("both samples need at least one non-missing value")
    pooled = np.sort(np.concatenate([a, b]))
    deltas = np.diff(pooled)
    fa = np.searchsorted(a, pooled[:-1], side="right") / len(a)
    fb = np.searchsorted(b, pooled[:-1], side="right") / len(b)
    return float(np.sum(np.abs(fa - fb) * deltas))


@dataclass(frozen=True)
class SupportCoverage:
    value: float                 # mean over columns of covered-fraction
    per_column: dict             # column -> fraction of real levels present
    novel_levels: dict           # column -> count of synthetic-only levels


def support_coverage(real: Dataset, synthetic: Dataset, categorical_columns) -> SupportCoverage:
    """Fraction of each real categorical column's levels present in synthetic.

    Uses intersection-over-real so the value stays in [0, 1]; synthetic-only
    levels are counted separately instead of inflating coverage.
    """
    per_column, novel = {}, {}
    for name in categorical_columns:
        for ds, label in ((real, "real"), (synthetic, "synthetic")):
            if ds.schema.column(name).kind != "categorical":
                raise NotCategorical(f"column {name!r} is not categorical in {label}")
        r_levels = set(real.columns[name].levels)
        s_levels = set(synthetic.columns[name].levels)
        novel[name] = len(s_levels - r_levels)
        per_column[name] = (
            1.0 if not r_levels else len(r_levels & s_levels) / len(r_levels)
        )
    value = float(np.mean(list(per_column.values()))) if per_column else 1.0
    return SupportCoverage(value=value, per_column=per_column, novel_levels=novel)


@dataclass
class MarginalMetric:
    column: str
    metric: str                       # ks | kl | wasserstein | wasserstein_scaled
    value: float | None
    p_value: float | None = None
    histogram: dict | None = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "column": self.column,
            "metric": self.metric,
            "value": self.value,
            "p_value": self.p_value,
            "histogram": self.histogram,
            "flags": list(self.flags),
        }


def _numeric_histogram(real_vals, syn_vals, n_bins):
    edges = edges_from_values(real_vals, n_bins) if len(real_vals) else np.empty(0)
    r_codes = assign_bins(real_vals, edges)
    s_codes = assign_bins(syn_vals, edges)
    k = len(edges) + 1
    return {
        "edges": [float(e) for e in edges],
        "real": [int(c) for c in np.bincount(r_codes, minlength=k)],
        "synthetic": [int(c) for c in np.bincount(s_codes, minlength=k)],
    }


def _level_counts(dataset: Dataset, name: str, levels) -> dict:
    col = dataset.columns[name]
    out = {}
    for lv in levels:
        try:
            code = col.levels.index(lv)
        except ValueError:
            out[lv] = 0
            continue
        out[lv] = int(np.sum(col.codes == code))
    n_missing = int(np.sum(col.codes < 0))
    if n_missing:
        out["(missing)"] = n_missing
    return out


def marginal_report(real: Dataset, synthetic: Dataset,
                    n_bins: int = DEFAULT_BINS) -> list:
    """Per-column marginal metrics with paired histogram data.

    Numeric columns report Wasserstein (raw and min-max scaled by the real
    range) and KS with p-value; categorical columns report KL divergence.
    Columns that are entirely missing on either side are flagged rather than
    raising.
    """
    if not real.schema.compatible_with(synthetic.schema):
        raise SchemaMismatch("marginal_report requires identical schemas")
    rows = []
    for spec in real.schema.columns:
        name = spec.name
        if spec.is_numeric:
            r = real.numeric_values(name)
            s = synthetic.numeric_values(name)
            flags = []
            if len(r) == 0:
                flags.append("all_missing_real")
            if len(s) == 0:
                flags.append("all_missing_synthetic")
            if flags:
                hist = _numeric_histogram(r, s, n_bins)
                rows.append(MarginalMetric(name, "ks", None, None, hist, tuple(flags)))
                continue
            stat, p = ks_two_sample(r, s)
            hist = _numeric_histogram(r, s, n_bins)
            rows.append(MarginalMetric(name, "ks", stat, p, hist))
            w = wasserstein_1d(r, s)
            rows.append(MarginalMetric(name, "wasserstein", w))
            span = float(r.max() - r.min())
            if span > 0:
                rows.append(MarginalMetric(name, "wasserstein_scaled", w / span))
            else:
                rows.append(MarginalMetric(name, "wasserstein_scaled", None,
                                           flags=("constant_real",)))
        else:
            levels = list(real.columns[name].levels)
            for lv in synthetic.columns[name].levels:
                if lv not in levels:
                    levels.append(lv)
            rc = _level_counts(real, name, levels)
            sc = _level_counts(synthetic, name, levels)
            hist = {
                "levels": levels + (["(missing)"] if "(missing)" in rc or "(missing)" in sc else []),
            }
            hist["real"] = [rc.get(lv, 0) for lv in hist["levels"]]
            hist["synthetic"] = [sc.get(lv, 0) for lv in hist["levels"]]
            if sum(rc.values()) == 0 or sum(sc.values()) == 0:
                flag = "all_missing_real" if sum(rc.values()) == 0 else "all_missing_synthetic"
                rows.append(MarginalMetric(name, "kl", None, histogram=hist, flags=(flag,)))
                continue
            rows.append(MarginalMetric(name, "kl", kl_divergence(rc, sc), histogram=hist))
    return rows
