import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.data import from_arrays
from synthaudit.errors import AllMissing, NotCategorical, SchemaMismatch
from synthaudit.schema import ColumnSpec, Schema
from synthaudit.univariate import (MarginalMetric, kl_divergence,
                                   kolmogorov_sf, ks_two_sample,
                                   marginal_report, support_coverage,
                                   wasserstein_1d)
from tests.conftest import make_mixed

CAT = Schema(columns=(ColumnSpec("c", "categorical"),))


def ecdf_sup_oracle(a, b):
    """Double-loop sup of ECDF difference over every sample point."""
    a, b = list(a), list(b)
    best = 0.0
    for x in a + b:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def kolmogorov_reference(lam, terms=2000):
    with mpmath.workdps(60):
        s = mpmath.mpf(0)
        for j in range(1, terms + 1):
            s += (-1) ** (j - 1) * mpmath.e ** (-2 * j * j * mpmath.mpf(lam) ** 2)
        return float(min(max(2 * s, 0), 1))


class TestKS:
    def test_identical_samples(self):
        stat, p = ks_two_sample([1.0, 2, 3], [1.0, 2, 3])
        assert stat == 0.0 and p == 1.0

    def test_disjoint_samples(self):
        stat, _p = ks_two_sample([1, 2, 3], [4, 5, 6])
        assert stat == 1.0

    def test_all_missing(self):
        with pytest.raises(AllMissing):
            ks_two_sample([np.nan], [1.0])

    def test_oracle_small(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            a = rng.normal(size=rng.integers(2, 40))
            b = rng.normal(loc=rng.normal(), size=rng.integers(2, 40))
            stat, _ = ks_two_sample(a, b)
            assert stat == pytest.approx(ecdf_sup_oracle(a, b), abs=1e-15)

    def test_paper_scale_fixture(self):
        # two samples of 10,000 whose ECDFs differ by exactly 126/10000,
        # matching the headline well-fit example (statistic 0.0126, p 0.405)
        n, k = 10_000, 126
        a = np.arange(1, n + 1, dtype=float)
        b = a.copy()
        b[-k:] = b[-k:] + 100_000.0
        stat, p = ks_two_sample(a, b)
        assert stat == pytest.approx(0.0126, abs=1e-15)
        assert p == pytest.approx(0.405, abs=1e-2)

    def test_p_against_reference(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.normal(size=60)
            b = rng.normal(loc=0.3 * rng.normal(), size=45)
            stat, p = ks_two_sample(a, b)
            n_eff = 60 * 45 / 105
            assert p == pytest.approx(
                kolmogorov_reference(math.sqrt(n_eff) * stat), abs=5e-3)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=80)
        b = rng.normal(0.5, size=70)
        s1, _ = ks_two_sample(a, b)
        s2, _ = ks_two_sample(np.exp(a), np.exp(b))
        assert s1 == pytest.approx(s2, abs=1e-15)

    def test_sf_clamped(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(1e9) == 0.0


class TestKL:
    def test_identical_zero(self):
        assert kl_divergence({"a": 10, "b": 5}, {"a": 10, "b": 5}) == 0.0

    def test_hand_value_no_smoothing(self):
        # p = [0.75, 0.25], q = [0.5, 0.5]
        val = kl_divergence({"a": 75, "b": 25}, {"a": 50, "b": 50})
        expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert val == pytest.approx(expected, abs=1e-12)
        assert val == pytest.approx(0.1308, abs=1e-4)

    def test_smoothing_on_absent_synthetic_level(self):
        val = kl_divergence({"a": 5, "b": 5}, {"a": 10})
        r = np.array([5.5, 5.5]) / 11.0
        s = np.array([10.5, 0.5]) / 11.0
        assert val == pytest.approx(float(np.sum(r * np.log(r / s))), abs=1e-12)

    def test_novel_synthetic_level_needs_no_smoothing(self):
        val = kl_divergence({"a": 5}, {"a": 5, "z": 5})
        assert val == pytest.approx(math.log(2.0), abs=1e-12)

    def test_close_match_scale_fixture(self):
        # a near-match binary marginal at the headline "close match" scale
        val = kl_divergence({"a": 5000, "b": 5000}, {"a": 4445, "b": 5555})
        assert val == pytest.approx(0.0062, abs=1e-4)

    def test_positive_total_required(self):
        with pytest.raises(ValueError):
            kl_divergence({"a": 0}, {"a": 1})

    @given(st.dictionaries(st.sampled_from("abcde"), st.integers(0, 50),
                           min_size=1),
           st.dictionaries(st.sampled_from("abcde"), st.integers(0, 50),
                           min_size=1))
    @settings(max_examples=80, deadline=None)
    def test_nonnegative_and_self_zero(self, rc, sc):
        if sum(rc.values()) == 0 or sum(sc.values()) == 0:
            return
        assert kl_divergence(rc, sc) >= 0.0
        assert kl_divergence(rc, rc) == 0.0


class TestWasserstein:
    def test_identical_zero(self):
        assert wasserstein_1d([1.0, 2, 3], [3.0, 2, 1]) == 0.0

    def test_point_masses(self):
        assert wasserstein_1d([0.0], [1.0]) == 1.0

    def test_translation_covariance(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=50)
        b = rng.normal(size=60)
        base = wasserstein_1d(a, b)
        assert wasserstein_1d(a + 5, b + 5) == pytest.approx(base, abs=1e-12)
        shifted = wasserstein_1d(a + 2.0, b)
        assert shifted <= base + 2.0 + 1e-12
        assert wasserstein_1d(a + 2.0, a) == pytest.approx(2.0, abs=1e-12)

    def test_grid_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a = np.sort(rng.normal(size=64))
            b = np.sort(rng.normal(0.7, 1.3, size=64))
            # equal sizes: W1 equals the mean absolute quantile difference
            qs = (np.arange(100000) + 0.5) / 100000
            qa = np.quantile(a, qs, method="inverted_cdf")
            qb = np.quantile(b, qs, method="inverted_cdf")
            assert wasserstein_1d(a, b) == pytest.approx(
                float(np.mean(np.abs(qa - qb))), abs=1e-3)


class TestSupportCoverage:
    def test_identity(self):
        ds = from_arrays(CAT, {"c": ["a", "b", "c"]})
        assert support_coverage(ds, ds, ["c"]).value == 1.0

    def test_half_covered(self):
        real = from_arrays(CAT, {"c": ["a", "b", "c", "d"]})
        syn = from_arrays(CAT, {"c": ["a", "b", "a", "b"]})
        assert support_coverage(real, syn, ["c"]).value == 0.5

    def test_two_column_mean(self):
        schema = Schema(columns=(
            ColumnSpec("c1", "categorical"), ColumnSpec("c2", "categorical"),
        ))
        real = from_arrays(schema, {"c1": ["a", "b"], "c2": ["x", "y"]})
        syn = from_arrays(schema, {"c1": ["a", "b"], "c2": ["x", "x"]})
        res = support_coverage(real, syn, ["c1", "c2"])
        assert res.value == 0.75
        assert res.per_column == {"c1": 1.0, "c2": 0.5}

    def test_monotone_in_missing_levels(self):
        real1 = from_arrays(CAT, {"c": ["a", "b"]})
        real2 = from_arrays(CAT, {"c": ["a", "b", "q"]})
        syn = from_arrays(CAT, {"c": ["a", "b"]})
        assert support_coverage(real2, syn, ["c"]).value <= \
            support_coverage(real1, syn, ["c"]).value

    def test_novel_levels_reported_not_counted(self):
        real = from_arrays(CAT, {"c": ["a", "b"]})
        syn = from_arrays(CAT, {"c": ["a", "b", "z"]})
        res = support_coverage(real, syn, ["c"])
        assert res.value == 1.0
        assert res.novel_levels == {"c": 1}

    def test_not_categorical(self):
        schema = Schema(columns=(ColumnSpec("x", "numeric"),))
        ds = from_arrays(schema, {"x": [1.0]})
        with pytest.raises(NotCategorical):
            support_coverage(ds, ds, ["x"])


class TestMarginalReport:
    def test_identity_all_zero(self, mixed_schema):
        ds = make_mixed(mixed_schema, 150, np.random.default_rng(5),
                        missing_rate=0.1)
        rows = marginal_report(ds, ds)
        for row in rows:
            if row.metric == "ks":
                assert row.value == 0.0 and row.p_value == 1.0
            elif row.metric in ("wasserstein", "wasserstein_scaled"):
                assert row.value == 0.0
            elif row.metric == "kl":
                assert row.value == 0.0

    def test_layout_matches_kind(self, mixed_schema):
        rng = np.random.default_rng(6)
        real = make_mixed(mixed_schema, 100, rng)
        syn = make_mixed(mixed_schema, 100, rng)
        rows = marginal_report(real, syn)
        by_col = {}
        for r in rows:
            by_col.setdefault(r.column, []).append(r.metric)
        assert by_col["age"] == ["ks", "wasserstein", "wasserstein_scaled"]
        assert by_col["sex"] == ["kl"]
        ks_row = next(r for r in rows if r.column == "age" and r.metric == "ks")
        assert ks_row.histogram is not None
        assert len(ks_row.histogram["real"]) == len(ks_row.histogram["edges"]) + 1

    def test_all_missing_synthetic_flagged(self, mixed_schema):
        rng = np.random.default_rng(7)
        real = make_mixed(mixed_schema, 50, rng)
        syn_cols = {
            "age": np.full(50, np.nan),
            "score": np.asarray(
                [syn_v for syn_v in make_mixed(mixed_schema, 50, rng)
                 .columns["score"].values]),
            "sex": ["M"] * 50,
            "race": ["White"] * 50,
        }
        syn = from_arrays(mixed_schema, syn_cols)
        rows = marginal_report(real, syn)
        age_rows = [r for r in rows if r.column == "age"]
        assert len(age_rows) == 1
        assert age_rows[0].value is None
        assert "all_missing_synthetic" in age_rows[0].flags

    def test_schema_mismatch(self, mixed_schema):
        real = make_mixed(mixed_schema, 10, np.random.default_rng(8))
        other = from_arrays(CAT, {"c": ["a"] * 10})
        with pytest.raises(SchemaMismatch):
            marginal_report(real, other)

    def test_to_dict_roundtrip_fields(self):
        m = MarginalMetric("age", "ks", 0.5, 0.1, {"edges": []}, ("f",))
        d = m.to_dict()
        assert d["column"] == "age" and d["flags"] == ["f"]
