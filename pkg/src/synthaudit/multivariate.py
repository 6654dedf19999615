"""Joint-distribution fidelity: correlation difference, discriminator metrics,
train-on-synthetic/test-on-real comparison, survival analysis, and the
clinical consistency rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CategoricalColumn, Dataset, concat_datasets
from .errors import (NegativeTime, NoEvents, SchemaMismatch, ShapeMismatch,
                     SingleClass, TargetInPredictors, TooFewColumns)
from .models import (Encoder, FeatureMatrix, feature_importance, ndcg,
                     roc_auc, roc_curve, train)
from .rules import evaluate_rule

DISCRIMINATOR_HYPERPARAMS = {"l2": 0.5, "max_iter": 250}


# ---------------------------------------------------------------------------
# pairwise correlation and PCD
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationMatrixPair:
    variable_names: tuple
    real_matrix: np.ndarray
    syn_matrix: np.ndarray
    constant_variables: tuple = ()      # flagged: correlation set to 0

    def __post_init__(self):
        for m in (self.real_matrix, self.syn_matrix):
            if m.shape != (len(self.variable_names),) * 2:
                raise ShapeMismatch("correlation matrix shape does not match names")


def _expand_variables(real: Dataset, synthetic: Dataset, columns):
    """Numeric columns stay; categorical ones become level indicators.

    A missing categorical cell is missing for all of its indicators so the
    pairwise-complete correlation excludes it.
    """
    names, real_cols, syn_cols = [], [], []
    for name in columns:
        col_r = real.columns[name]
        col_s = synthetic.columns[name]
        if isinstance(col_r, CategoricalColumn):
            levels = list(col_r.levels)
            for lv in col_s.levels:
                if lv not in levels:
                    levels.append(lv)
            for lv in levels:
                names.append(f"{name}={lv}")
                for col, out in ((col_r, real_cols), (col_s, syn_cols)):
                    try:
                        code = col.levels.index(lv)
                        vec = (col.codes == code).astype(np.float64)
                    except ValueError:
                        vec = np.zeros(len(col.codes))
                    vec = vec.copy()
                    vec[col.codes < 0] = np.nan
                    out.append(vec)
        else:
            names.append(name)
            real_cols.append(col_r.values)
            syn_cols.append(col_s.values)
    return tuple(names), np.column_stack(real_cols), np.column_stack(syn_cols)


def _pairwise_pearson(X):
    """Pearson correlation over pairwise-complete observations (matmul form)."""
    M = (~np.isnan(X)).astype(np.float64)
    X0 = np.nan_to_num(X)
    X2 = X0 * X0
    N = M.T @ M
    P = X0.T @ X0
    S1 = X0.T @ M           # S1[u, v] = sum of x_u over rows where v is defined
    S2 = X2.T @ M
    with np.errstate(invalid="ignore", divide="ignore"):
        num = P - S1 * S1.T / N
        var_u = S2 - S1 * S1 / N
        den = np.sqrt(var_u * var_u.T)
        corr = num / den
    bad = ~np.isfinite(corr) | (N < 2)
    corr = np.where(bad, 0.0, corr)
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def correlation_pair(real: Dataset, synthetic: Dataset, columns=None) -> CorrelationMatrixPair:
    """Paired Pearson correlation matrices over the given columns."""
    if not real.schema.compatible_with(synthetic.schema):
        raise SchemaMismatch("correlation_pair requires identical schemas")
    columns = list(columns) if columns else list(real.schema.names)
    if len(columns) < 2:
        raise TooFewColumns("correlation needs at least two columns")
    names, Xr, Xs = _expand_variables(real, synthetic, columns)
    if Xr.shape[1] < 2:
        raise TooFewColumns("correlation needs at least two expanded variables")
    constant = []
    for j, name in enumerate(names):
        for X in (Xr, Xs):
            v = X[:, j]
            v = v[~np.isnan(v)]
            if len(v) == 0 or np.all(v == v[0]):
                constant.append(name)
                break
    return CorrelationMatrixPair(
        variable_names=names,
        real_matrix=_pairwise_pearson(Xr),
        syn_matrix=_pairwise_pearson(Xs),
        constant_variables=tuple(constant),
    )


@dataclass(frozen=True)
class PcdResult:
    pcd_l1: float          # mean |difference| over the strict upper triangle
    pcd_l2: float          # root-mean-square over the strict upper triangle
    pcd_l1_raw: float      # entrywise L1 norm of the full difference matrix
    pcd_l2_raw: float      # Frobenius norm of the full difference matrix


def pcd(pair: CorrelationMatrixPair) -> PcdResult:
    """Pairwise correlation difference in normalized and raw-norm forms."""
    a, b = pair.real_matrix, pair.syn_matrix
    if a.shape != b.shape:
        raise ShapeMismatch("correlation matrices differ in shape")
    diff = a - b
    iu = np.triu_indices(a.shape[0], k=1)
    upper = np.abs(diff[iu])
    l1 = float(np.mean(upper)) if len(upper) else 0.0
    l2 = float(np.sqrt(np.mean(upper ** 2))) if len(upper) else 0.0
    return PcdResult(
        pcd_l1=l1, pcd_l2=l2,
        pcd_l1_raw=float(np.sum(np.abs(diff))),
        pcd_l2_raw=float(np.linalg.norm(diff)),
    )


# ---------------------------------------------------------------------------
# discriminator AUC / pMSE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscriminatorResult:
    auc_mean: float
    auc_sd: float
    pmse_mean: float
    pmse_sd: float
    per_repeat_auc: tuple
    per_repeat_pmse: tuple
    family: str
    folds: int
    repeats: int


def pmse(propensities, synthetic_fraction: float) -> float:
    """Mean squared deviation of propensity scores from the synthetic share."""
    p = np.asarray(propensities, dtype=np.float64)
    return float(np.mean((p - synthetic_fraction) ** 2))


def _record_groups(dataset: Dataset) -> np.ndarray:
    """Group id per row; rows with cell-identical records share a group."""
    blocks = []
    for spec in dataset.schema.columns:
        col = dataset.columns[spec.name]
        if isinstance(col, CategoricalColumn):
            blocks.append(col.codes.astype(np.float64))
        else:
            missing = np.isnan(col.values)
            blocks.append(np.where(missing, 0.0, col.values))
            blocks.append(missing.astype(np.float64))
    key = np.column_stack(blocks)
    _, inverse = np.unique(key, axis=0, return_inverse=True)
    return inverse


def _grouped_folds(groups, folds, rng):
    """Fold id per row; identical records always land in the same fold.

    Keeping duplicates together prevents memorization leakage: when the
    synthetic table copies real records, a model trained with one twin and
    scored on the other would systematically rank the held-out twin on the
    wrong side, biasing AUC away from 1/2.
    """
    group_ids = np.unique(groups)
    order = rng.permutation(len(group_ids))
    fold_of_group = np.empty(len(group_ids), dtype=np.int64)
    fold_of_group[order] = np.arange(len(group_ids)) % folds
    return fold_of_group[np.searchsorted(group_ids, groups)]


def discriminator_metrics(real: Dataset, synthetic: Dataset,
                          family: str = "logistic", folds: int = 5,
                          repeats: int = 5, seed: int = 0,
                          hyperparams: dict | None = None) -> DiscriminatorResult:
    """Cross-validated real-vs-synthetic discriminator AUC and pMSE.

    Rows are pooled (real labeled 0, synthetic 1); out-of-fold propensities
    feed both metrics; pmse is the mean squared deviation of the propensity
    from the synthetic fraction.  Repeats rerun the fold split with fresh
    seeds and are summarized as mean and (n-1) standard deviation.
    """
    if not real.schema.compatible_with(synthetic.schema):
        raise SchemaMismatch("discriminator needs identical schemas")
    pooled = concat_datasets(real, synthetic)
    y = np.concatenate([np.zeros(real.row_count), np.ones(synthetic.row_count)])
    c = synthetic.row_count / pooled.row_count
    hp = hyperparams if hyperparams is not None else (
        DISCRIMINATOR_HYPERPARAMS if family == "logistic" else None)
    groups = _record_groups(pooled)
    seeds = np.random.SeedSequence(seed).spawn(repeats)
    aucs, pmses = [], []
    for r in range(repeats):
        rng = np.random.default_rng(seeds[r])
        fold_of = _grouped_folds(groups, folds, rng)
        propensity = np.empty(pooled.row_count)
        for k in range(folds):
            tr = np.flatnonzero(fold_of != k)
            te = np.flatnonzero(fold_of == k)
            encoder = Encoder.fit(pooled, rows=tr)
            feats = encoder.transform(pooled)
            sub = FeatureMatrix(feats.feature_names, feats.column_of,
                                feats.values[tr])
            model = train(sub, y[tr], family=family, hyperparams=hp,
                          seed=seed * 1000 + r)
            propensity[te] = model.predict_proba(
                FeatureMatrix(feats.feature_names, feats.column_of,
                              feats.values[te]))
        aucs.append(roc_auc(propensity, y))
        pmses.append(pmse(propensity, c))
    return DiscriminatorResult(
        auc_mean=float(np.mean(aucs)),
        auc_sd=float(np.std(aucs, ddof=1)) if repeats > 1 else 0.0,
        pmse_mean=float(np.mean(pmses)),
        pmse_sd=float(np.std(pmses, ddof=1)) if repeats > 1 else 0.0,
        per_repeat_auc=tuple(aucs), per_repeat_pmse=tuple(pmses),
        family=family, folds=folds, repeats=repeats,
    )


# ---------------------------------------------------------------------------
# train-on-synthetic / test-on-real
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TstrResult:
    auc_real_mean: float
    auc_real_sd: float
    auc_syn_mean: float
    auc_syn_sd: float
    ratio_mean: float
    ratio_sd: float
    ndcg_mean: float
    ndcg_sd: float
    per_repeat: tuple              # (auc_real, auc_syn, ratio, ndcg) rows
    curves: dict                   # first-repeat ROC curves
    importances: dict              # first-repeat column importances
    target: str
    positive_level: str
    family: str


def _binary_target(dataset: Dataset, target: str):
    """0/1 labels plus a defined-rows mask; positive class sorts last."""
    col = dataset.columns[target]
    if isinstance(col, CategoricalColumn):
        defined = col.codes >= 0
        observed = sorted(set(col.levels[c] for c in col.codes[defined]))
        if len(observed) < 2:
            raise SingleClass(f"target {target!r} has a single observed level")
        if len(observed) > 2:
            raise SingleClass(
                f"target {target!r} has {len(observed)} levels; binary required")
        positive = observed[1]
        y = np.zeros(dataset.row_count)
        y[col.codes == col.levels.index(positive)] = 1.0
        return y, defined, positive
    vals = col.values
    defined = ~np.isnan(vals)
    observed = sorted(set(vals[defined].tolist()))
    if len(observed) < 2:
        raise SingleClass(f"target {target!r} has a single observed value")
    if len(observed) > 2:
        raise SingleClass(f"target {target!r} is not 0/1-coded")
    y = (vals == observed[1]).astype(np.float64)
    return y, defined, repr(observed[1])


def tstr_compare(real: Dataset, synthetic: Dataset, target: str,
                 predictors=None, family: str = "logistic", seed: int = 0,
                 repeats: int = 5, holdout: float = 0.2,
                 hyperparams: dict | None = None) -> TstrResult:
    """Train on real vs train on synthetic; evaluate both on held-out real.

    Per repeat, a seeded stratified holdout of the real table is set aside;
    one model trains on the remaining real rows and another on the synthetic
    table; both are scored on the holdout.  The AUC ratio (synthetic/real) and
    the nDCG of the synthetic model's feature-importance ranking against the
    real model's importances summarize fidelity.
    """
    if not real.schema.compatible_with(synthetic.schema):
        raise SchemaMismatch("tstr_compare requires identical schemas")
    predictors = list(predictors) if predictors else \
        [n for n in real.schema.names if n != target]
    if target in predictors:
        raise TargetInPredictors(f"target {target!r} appears in predictors")

    y_real, def_real, positive = _binary_target(real, target)
    y_syn, def_syn, _ = _binary_target(synthetic, target)
    real_rows = np.flatnonzero(def_real)
    syn_rows = np.flatnonzero(def_syn)

    seeds = np.random.SeedSequence(seed).spawn(repeats)
    rows_out = []
    curves, importances = {}, {}
    for r in range(repeats):
        rng = np.random.default_rng(seeds[r])
        y_sub = y_real[real_rows]
        val_local = []
        for cls in (0, 1):
            idx = np.flatnonzero(y_sub == cls)
            idx = idx[rng.permutation(len(idx))]
            take = max(1, int(round(holdout * len(idx))))
            val_local.append(idx[:take])
        val_local = np.sort(np.concatenate(val_local))
        val_rows = real_rows[val_local]
        train_mask = np.ones(len(real_rows), dtype=bool)
        train_mask[val_local] = False
        train_rows = real_rows[train_mask]

        run_seed = seed * 1000 + r
        enc_real = Encoder.fit(real, rows=train_rows, columns=predictors)
        feats_real = enc_real.transform(real)
        model_real = train(
            FeatureMatrix(feats_real.feature_names, feats_real.column_of,
                          feats_real.values[train_rows]),
            y_real[train_rows], family=family, hyperparams=hyperparams,
            seed=run_seed)
        enc_syn = Encoder.fit(synthetic, rows=syn_rows, columns=predictors)
        feats_syn = enc_syn.transform(synthetic)
        model_syn = train(
            FeatureMatrix(feats_syn.feature_names, feats_syn.column_of,
                          feats_syn.values[syn_rows]),
            y_syn[syn_rows], family=family, hyperparams=hyperparams,
            seed=run_seed)

        val_scores_real = model_real.decision_scores(
            FeatureMatrix(feats_real.feature_names, feats_real.column_of,
                          feats_real.values[val_rows]))
        feats_real_for_syn = enc_syn.transform(real)
        val_scores_syn = model_syn.decision_scores(
            FeatureMatrix(feats_real_for_syn.feature_names,
                          feats_real_for_syn.column_of,
                          feats_real_for_syn.values[val_rows]))
        y_val = y_real[val_rows]
        auc_real = roc_auc(val_scores_real, y_val)
        auc_syn = roc_auc(val_scores_syn, y_val)
        imp_real = feature_importance(model_real)
        imp_syn = feature_importance(model_syn)
        score = ndcg(imp_real, [name for name, _ in imp_syn])
        rows_out.append((auc_real, auc_syn, auc_syn / auc_real, score))
        if r == 0:
            curves = {
                "real": roc_curve(val_scores_real, y_val),
                "synthetic": roc_curve(val_scores_syn, y_val),
            }
            importances = {
                "real": [[n, v] for n, v in imp_real],
                "synthetic": [[n, v] for n, v in imp_syn],
            }

    arr = np.array(rows_out)
    sd = lambda v: float(np.std(v, ddof=1)) if repeats > 1 else 0.0
    return TstrResult(
        auc_real_mean=float(np.mean(arr[:, 0])), auc_real_sd=sd(arr[:, 0]),
        auc_syn_mean=float(np.mean(arr[:, 1])), auc_syn_sd=sd(arr[:, 1]),
        ratio_mean=float(np.mean(arr[:, 2])), ratio_sd=sd(arr[:, 2]),
        ndcg_mean=float(np.mean(arr[:, 3])), ndcg_sd=sd(arr[:, 3]),
        per_repeat=tuple(map(tuple, rows_out)), curves=curves,
        importances=importances, target=target, positive_level=positive,
        family=family,
    )


# ---------------------------------------------------------------------------
# survival analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurvivalCurve:
    event_times: np.ndarray        # distinct times with >= 1 event, sorted
    survival_prob: np.ndarray      # product-limit value just after each time
    at_risk: np.ndarray            # risk-set size at each event time
    events: np.ndarray             # number of events at each time
    n: int

    def survival_at(self, t: float) -> float:
        idx = np.searchsorted(self.event_times, t, side="right")
        return 1.0 if idx == 0 else float(self.survival_prob[idx - 1])

    def step_series(self):
        """(time, survival) pairs for plotting, starting at (0, 1)."""
        times = [0.0] + [float(t) for t in self.event_times]
        probs = [1.0] + [float(p) for p in self.survival_prob]
        return {"time": times, "survival": probs}


def kaplan_meier(times, events) -> SurvivalCurve:
    """Product-limit survival estimate under right censoring.

    Censored subjects leave the risk set after their time; subjects censored
    at an event time are still at risk for that event.
    """
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events)
    if len(times) != len(events):
        raise ValueError("times and events must have equal length")
    if np.any(np.isnan(times)) or np.any(times < 0):
        raise NegativeTime("event times must be non-negative and non-missing")
    order = np.argsort(times, kind="mergesort")
    times = times[order]
    events = events[order].astype(bool)
    n = len(times)
    uniq = np.unique(times[events])
    surv, at_risk, d_counts = [], [], []
    s = 1.0
    for t in uniq:
        n_t = int(np.sum(times >= t))
        d_t = int(np.sum(events & (times == t)))
        s *= (n_t - d_t) / n_t
        surv.append(s)
        at_risk.append(n_t)
        d_counts.append(d_t)
    return SurvivalCurve(
        event_times=uniq, survival_prob=np.asarray(surv),
        at_risk=np.asarray(at_risk, dtype=np.int64),
        events=np.asarray(d_counts, dtype=np.int64), n=n,
    )


def log_rank(group_a, group_b):
    """Two-group log-rank test: (chi-square statistic, p-value, 1 df)."""
    ta, ea = (np.asarray(group_a[0], dtype=np.float64),
              np.asarray(group_a[1]).astype(bool))
    tb, eb = (np.asarray(group_b[0], dtype=np.float64),
              np.asarray(group_b[1]).astype(bool))
    for t in (ta, tb):
        if np.any(np.isnan(t)) or np.any(t < 0):
            raise NegativeTime("event times must be non-negative and non-missing")
    if not np.any(ea) or not np.any(eb):
        raise NoEvents("both groups need at least one event")
    event_times = np.unique(np.concatenate([ta[ea], tb[eb]]))
    observed_minus_expected = 0.0
    variance = 0.0
    for t in event_times:
        n1 = int(np.sum(ta >= t))
        n2 = int(np.sum(tb >= t))
        d1 = int(np.sum(ea & (ta == t)))
        d2 = int(np.sum(eb & (tb == t)))
        n = n1 + n2
        d = d1 + d2
        if n < 2 or d == 0:
            continue
        observed_minus_expected += d1 - d * n1 / n
        variance += d * (n1 / n) * (n2 / n) * (n - d) / (n - 1)
    if variance <= 0.0:
        return 0.0, 1.0
    chi2 = observed_minus_expected ** 2 / variance
    return float(chi2), float(math.erfc(math.sqrt(chi2 / 2.0)))


def log_rank_p(group_a, group_b) -> float:
    return log_rank(group_a, group_b)[1]


# ---------------------------------------------------------------------------
# clinical consistency rate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyResult:
    violation_fraction: float
    per_rule: dict                 # rule name -> violating record count
    n_rows: int


def consistency_rate(dataset: Dataset, rules) -> ConsistencyResult:
    """Fraction of records violating ANY rule, plus per-rule counts."""
    per_rule = {}
    any_violation = np.zeros(dataset.row_count, dtype=bool)
    for rule in rules:
        hits = evaluate_rule(rule, dataset)
        per_rule[rule.name] = int(np.sum(hits))
        any_violation |= hits
    fraction = float(np.mean(any_violation)) if dataset.row_count else 0.0
    return ConsistencyResult(violation_fraction=fraction, per_rule=per_rule,
                             n_rows=dataset.row_count)
