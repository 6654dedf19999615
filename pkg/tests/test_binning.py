import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.binning import (assign_bins, bin_views, jenks_breaks,
                                percentile_bin, select_jenks_k)
from synthaudit.data import from_arrays
from synthaudit.errors import AllMissing, NotNumeric, TooFewDistinct
from synthaudit.schema import ColumnSpec, Schema

NUM_SCHEMA = Schema(columns=(ColumnSpec("x", "numeric"),))


def num_ds(values):
    return from_arrays(NUM_SCHEMA, {"x": np.asarray(values, dtype=float)})


def brute_quantile(sorted_vals, q):
    """Linear interpolation between order statistics (independent oracle)."""
    pos = q * (len(sorted_vals) - 1)
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


class TestPercentileBin:
    def test_1_to_100_quartiles(self):
        edges = percentile_bin(num_ds(np.arange(1, 101)), "x", 4)
        ref = [brute_quantile(sorted(range(1, 101)), q) for q in (0.25, 0.5, 0.75)]
        assert ref == [25.75, 50.5, 75.25]
        assert np.allclose(edges, ref)

    def test_constant_column_single_bin(self):
        assert len(percentile_bin(num_ds([5, 5, 5]), "x", 4)) == 0

    def test_median_edge(self):
        edges = percentile_bin(num_ds([1, 2, 3, 4]), "x", 2)
        assert list(edges) == [2.5]
        codes = assign_bins(np.array([1.0, 2, 3, 4]), edges)
        assert list(codes) == [0, 0, 1, 1]

    def test_not_numeric(self):
        schema = Schema(columns=(ColumnSpec("c", "categorical"),))
        ds = from_arrays(schema, {"c": ["a", "b"]})
        with pytest.raises(NotNumeric):
            percentile_bin(ds, "c", 4)

    def test_all_missing(self):
        with pytest.raises(AllMissing):
            percentile_bin(num_ds([np.nan, np.nan]), "x", 4)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200),
           st.integers(2, 12))
    @settings(max_examples=60, deadline=None)
    def test_edges_monotone_and_bins_partition(self, values, n_bins):
        edges = percentile_bin(num_ds(values), "x", n_bins)
        assert np.all(np.diff(edges) > 0)
        codes = assign_bins(np.asarray(values, dtype=float), edges)
        assert np.all(codes >= 0) and np.all(codes <= len(edges))
        # each value falls in exactly the bin whose interval contains it
        for v, c in zip(values, codes):
            lo = -np.inf if c == 0 else edges[c - 1]
            hi = np.inf if c == len(edges) else edges[c]
            assert lo <= v < hi or (v == lo and c > 0) or (c == len(edges) and v >= lo)


def oracle_jenks(values, k):
    """Exhaustive search over all break placements (small inputs only)."""
    distinct = sorted(set(values))
    values = np.asarray(values, dtype=float)
    best = None
    for breaks in itertools.combinations(range(1, len(distinct)), k - 1):
        bounds = [-np.inf] + [0.5 * (distinct[b - 1] + distinct[b]) for b in breaks] \
            + [np.inf]
        ssw = 0.0
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            grp = values[(values > lo) & (values <= hi)] if lo != -np.inf else \
                values[values <= hi]
            if len(grp):
                ssw += float(np.sum((grp - grp.mean()) ** 2))
        if best is None or ssw < best:
            best = ssw
    sst = float(np.sum((values - values.mean()) ** 2))
    return best, (1.0 if sst == 0 else 1.0 - best / sst)


class TestJenks:
    def test_two_clusters(self):
        values = [1, 2, 3, 100, 101, 102]
        edges, gvf = jenks_breaks(values, 2)
        assert len(edges) == 1 and 3 < edges[0] < 100
        _ssw, gvf_oracle = oracle_jenks(values, 2)
        assert gvf == pytest.approx(gvf_oracle, abs=1e-12)
        assert gvf > 0.999

    def test_k_equals_distinct_gvf_one(self):
        _edges, gvf = jenks_breaks([3, 1, 4, 1, 5], 4)   # 4 distinct values
        assert gvf == 1.0

    def test_constant_gvf_one(self):
        edges, gvf = jenks_breaks([1, 1, 1], 1)
        assert len(edges) == 0 and gvf == 1.0

    def test_too_few_distinct(self):
        with pytest.raises(TooFewDistinct):
            jenks_breaks([1, 1, 2], 3)

    @given(st.lists(st.integers(-50, 50), min_size=2, max_size=30, unique=True),
           st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_gvf_nondecreasing_in_k(self, values, k_hi):
        k_hi = min(k_hi, len(values))
        gvfs = [jenks_breaks(values, k)[1] for k in range(1, k_hi + 1)]
        assert all(b >= a - 1e-12 for a, b in zip(gvfs, gvfs[1:]))

    @given(st.lists(st.integers(0, 40), min_size=2, max_size=18),
           st.integers(2, 4))
    @settings(max_examples=40, deadline=None)
    def test_matches_exhaustive_oracle(self, values, k):
        distinct = len(set(values))
        if distinct > 12 or k > distinct:
            return
        _edges, gvf = jenks_breaks(values, k)
        ssw_oracle, gvf_oracle = oracle_jenks(values, k)
        assert gvf == pytest.approx(gvf_oracle, abs=1e-9)


class TestSelectJenksK:
    def test_two_clusters_selects_two(self):
        assert select_jenks_k([1, 2, 3, 100, 101, 102]) == 2

    def test_constant_selects_one(self):
        assert select_jenks_k([7, 7, 7]) == 1

    def test_linear_matches_bruteforce(self):
        values = list(range(1, 21))
        picked = select_jenks_k(values, 0.8, 10)
        expected = next(
            k for k in range(1, 11) if jenks_breaks(values, k)[1] >= 0.8
        )
        assert picked == expected

    def test_kmax_fallback(self):
        # spread values where k_max=1 cannot reach the threshold
        assert select_jenks_k([1, 2, 3, 100, 101, 102], 0.99, 1) == 1

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            select_jenks_k([1, 2], 0.0)


class TestBinViews:
    def test_shared_levels_and_edges(self):
        schema = Schema(columns=(
            ColumnSpec("x", "numeric"), ColumnSpec("c", "categorical"),
        ))
        a = from_arrays(schema, {"x": [1.0, 2, 3, 4], "c": ["a", "b", "a", None]})
        b = from_arrays(schema, {"x": [2.5, 9.0], "c": ["b", "z"]})
        va, vb = bin_views([a, b], n_bins=2)
        assert np.array_equal(va.bin_edges["x"], vb.bin_edges["x"])
        assert va.levels["c"] == vb.levels["c"] == ("a", "b", "z")
        # same level string maps to the same code on both sides
        assert vb.codes["c"][0] == va.codes["c"][1]
        assert va.codes["c"][3] == -1
        assert va.arity == vb.arity

    def test_categorical_pass_through(self):
        schema = Schema(columns=(ColumnSpec("c", "categorical"),))
        ds = from_arrays(schema, {"c": ["x", "y", "x"]})
        view, = bin_views([ds])
        assert list(view.codes["c"]) == [0, 1, 0]
