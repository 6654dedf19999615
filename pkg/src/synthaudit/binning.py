"""Numeric discretization: percentile bins and Jenks natural breaks.

Binned views turn every column categorical (missing is its own pseudo-level,
code -1) so that Hamming-style distances and equivalence-class grouping apply
uniformly.  Views built together share level dictionaries and bin edges, which
makes codes comparable across datasets.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import AllMissing, NotNumeric, TooFewDistinct

DEFAULT_BINS = 10


def percentile_bin(dataset: Dataset, column: str, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Interior bin edges at quantiles i/n_bins of the non-missing values.

    Quantiles use linear interpolation between order statistics.  Duplicate
    quantile values are collapsed and edges that would leave the bottom bin
    empty (edge <= min) are dropped, so fewer than n_bins effective bins are
    possible.
    """
    spec = dataset.schema.column(column)
    if not spec.is_numeric:
        raise NotNumeric(f"column {column!r} is {spec.kind}, not numeric")
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    vals = dataset.numeric_values(column)
    if len(vals) == 0:
        raise AllMissing(f"column {column!r} has no non-missing values")
    return edges_from_values(vals, n_bins)


def edges_from_values(vals: np.ndarray, n_bins: int) -> np.ndarray:
    qs = np.arange(1, n_bins) / n_bins
    edges = np.unique(np.quantile(vals, qs))
    return edges[edges > vals.min()]


def assign_bins(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin index per value (int32, missing -> -1); values >= an edge go up."""
    values = np.asarray(values, dtype=np.float64)
    codes = np.searchsorted(edges, values, side="right").astype(np.int32)
    codes[np.isnan(values)] = -1
    return codes


def _distinct_weighted(values):
    vals = np.asarray(values, dtype=np.float64)
    vals = vals[~np.isnan(vals)]
    if len(vals) == 0:
        raise AllMissing("no non-missing values")
    distinct, counts = np.unique(vals, return_counts=True)
    return distinct, counts.astype(np.float64)


def _fisher_tables(distinct, weights, k_max):
    """Dynamic program over sorted distinct values with multiplicities.

    Returns (cost, split) where cost[k][j] is the minimal within-class sum of
    squared deviations for the first j+1 distinct values split into k+1
    classes, and split[k][j] is the first index of the last class at the
    optimum (lowest-index optimum, for determinism).
    """
    m = len(distinct)
    w = np.concatenate([[0.0], np.cumsum(weights)])
    wx = np.concatenate([[0.0], np.cumsum(weights * distinct)])
    wx2 = np.concatenate([[0.0], np.cumsum(weights * distinct * distinct)])

    def seg_cost(i, j):
        # SSD of distinct[i..j] inclusive, vectorized over i
        W = w[j + 1] - w[i]
        S = wx[j + 1] - wx[i]
        S2 = wx2[j + 1] - wx2[i]
        return S2 - S * S / W

    idx = np.arange(m)
    cost = np.empty((k_max, m))
    split = np.zeros((k_max, m), dtype=np.int64)
    cost[0] = seg_cost(np.zeros(m, dtype=np.int64), idx)
    for k in range(1, k_max):
        for j in range(m):
            if k > j:
                # more classes than values: never reached by backtracking
                cost[k][j] = 0.0
                split[k][j] = j
                continue
            starts = np.arange(k, j + 1)
            total = cost[k - 1][starts - 1] + seg_cost(starts, np.full(len(starts), j))
            best = int(np.argmin(total))
            cost[k][j] = total[best]
            split[k][j] = starts[best]
    return cost, split


def _backtrack(split, distinct, k):
    """Class boundaries -> interior edges halfway between adjacent classes."""
    edges = []
    j = len(distinct) - 1
    for kk in range(k - 1, 0, -1):
        start = split[kk][j]
        edges.append(0.5 * (distinct[start - 1] + distinct[start]))
        j = start - 1
    return np.array(edges[::-1], dtype=np.float64)


def jenks_breaks(values, k: int):
    """Optimal k-class 1-D classification (Fisher's exact dynamic program).

    Returns (interior_edges, gvf) where gvf = 1 - SSW/SST is the
    goodness-of-variance fit; gvf is defined as 1.0 when SST is zero.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct, weights = _distinct_weighted(values)
    if k > len(distinct):
        raise TooFewDistinct(
            f"k={k} exceeds the {len(distinct)} distinct non-missing values"
        )
    cost, split = _fisher_tables(distinct, weights, k)
    sst = cost[0][len(distinct) - 1]
    ssw = cost[k - 1][len(distinct) - 1]
    gvf = 1.0 if sst <= 0.0 else 1.0 - ssw / sst
    return _backtrack(split, distinct, k), float(min(max(gvf, 0.0), 1.0))


def select_jenks_k(values, gvf_threshold: float = 0.8, k_max: int = 20) -> int:
    """Smallest k whose Jenks classification reaches the gvf threshold.

    Scans k = 1..min(k_max, #distinct); falls back to k_max if the threshold
    is never reached (only possible when k_max < #distinct).
    """
    if not 0.0 < gvf_threshold <= 1.0:
        raise ValueError("gvf_threshold must be in (0, 1]")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    distinct, weights = _distinct_weighted(values)
    limit = min(k_max, len(distinct))
    cost, _split = _fisher_tables(distinct, weights, limit)
    sst = cost[0][len(distinct) - 1]
    if sst <= 0.0:
        return 1
    for k in range(1, limit + 1):
        gvf = 1.0 - cost[k - 1][len(distinct) - 1] / sst
        if gvf >= gvf_threshold:
            return k
    return k_max


def jenks_edges(values, gvf_threshold: float = 0.8, k_max: int = 20) -> np.ndarray:
    k = select_jenks_k(values, gvf_threshold, k_max)
    edges, _gvf = jenks_breaks(values, k)
    return edges


@dataclass(frozen=True)
class BinnedView:
    """Per-column integer codes for a dataset (numerics discretized)."""
    source: Dataset
    bin_edges: dict              # numeric column -> sorted interior edges
    codes: dict                  # column -> int32 codes, -1 missing
    arity: dict                  # column -> number of non-missing codes
    levels: dict                 # categorical column -> shared level tuple

    @property
    def row_count(self) -> int:
        return self.source.row_count

    def code_matrix(self, columns=None) -> np.ndarray:
        names = columns if columns is not None else self.source.schema.names
        return np.column_stack([self.codes[n] for n in names])


def bin_views(datasets, n_bins: int = DEFAULT_BINS, fit_on=(0,), edges=None,
              method: str = "percentile", gvf_threshold: float = 0.8,
              k_max: int = 20, columns=None):
    """Build comparable binned views for several datasets of one schema.

    Numeric bin edges are fit on the pooled non-missing values of the
    ``fit_on`` datasets (percentile bins by default, Jenks optionally) unless
    explicit ``edges`` are given.  Categorical level dictionaries are unified
    across all datasets so equal codes mean equal values everywhere.  Pass
    ``columns`` to restrict the view to a subset of columns.
    """
    datasets = list(datasets)
    schema = datasets[0].schema
    for ds in datasets[1:]:
        if not ds.schema.compatible_with(schema):
            raise ValueError("bin_views requires datasets sharing one schema")

    wanted = set(columns) if columns is not None else None
    specs = [c for c in schema.columns if wanted is None or c.name in wanted]
    shared_edges, shared_levels = {}, {}
    for spec in specs:
        if spec.is_numeric:
            if edges is not None and spec.name in edges:
                shared_edges[spec.name] = np.asarray(edges[spec.name], dtype=np.float64)
                continue
            pooled = np.concatenate(
                [datasets[i].numeric_values(spec.name) for i in fit_on]
            )
            if len(pooled) == 0:
                shared_edges[spec.name] = np.empty(0)
            elif method == "jenks":
                shared_edges[spec.name] = jenks_edges(pooled, gvf_threshold, k_max)
            else:
                shared_edges[spec.name] = edges_from_values(pooled, n_bins)
        else:
            union = []
            seen = set()
            for ds in datasets:
                for lv in ds.columns[spec.name].levels:
                    if lv not in seen:
                        seen.add(lv)
                        union.append(lv)
            shared_levels[spec.name] = tuple(union)

    views = []
    for ds in datasets:
        codes, arity = {}, {}
        for spec in specs:
            if spec.is_numeric:
                e = shared_edges[spec.name]
                codes[spec.name] = assign_bins(ds.columns[spec.name].values, e)
                arity[spec.name] = len(e) + 1
            else:
                col = ds.columns[spec.name]
                union = shared_levels[spec.name]
                lookup = {lv: i for i, lv in enumerate(union)}
                if col.levels:
                    remap = np.array(
                        [lookup[lv] for lv in col.levels], dtype=np.int32
                    )
                    new = np.where(col.codes >= 0, remap[np.maximum(col.codes, 0)], -1)
                else:
                    new = np.full(len(col.codes), -1)
                codes[spec.name] = new.astype(np.int32)
                arity[spec.name] = len(union)
        views.append(
            BinnedView(source=ds, bin_edges=dict(shared_edges), codes=codes,
                       arity=arity, levels=dict(shared_levels))
        )
    return views


def bin_dataset(dataset: Dataset, n_bins: int = DEFAULT_BINS, **kwargs) -> BinnedView:
    return bin_views([dataset], n_bins=n_bins, **kwargs)[0]


def same_binning(a: BinnedView, b: BinnedView) -> bool:
    if set(a.bin_edges) != set(b.bin_edges) or a.arity != b.arity:
        return False
    for name, ea in a.bin_edges.items():
        if not np.array_equal(ea, b.bin_edges[name]):
            return False
    return a.levels == b.levels
