"""Self-contained supervised learners and ranking metrics.

Two deterministic model families power the model-based fidelity checks: an
L2-regularized logistic regression fit by accelerated full-batch gradient
descent, and gradient-boosted depth-1 stumps (Newton boosting on log-loss, or
squared loss for numeric targets).  Feature encoding is one-hot for
categorical levels (with an explicit missing-level indicator) and
standardization for numerics, always fit on the designated training rows only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CategoricalColumn, Dataset
from .errors import FeatureMismatch, SingleClass

DEFAULT_L2_GRID = (0.01, 0.1, 1.0)
DEFAULT_STUMP_GRID = ((100, 0.1), (200, 0.1), (100, 0.3))
STUMP_LAMBDA = 1.0
MAX_THRESHOLDS = 16


@dataclass(frozen=True)
class FeatureMatrix:
    feature_names: tuple
    column_of: tuple             # parent dataset column per feature
    values: np.ndarray           # float64 (rows, features)

    @property
    def row_count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Encoder:
    columns: tuple
    cat_levels: dict             # column -> levels seen in fit rows
    num_stats: dict              # column -> (mean, scale)
    feature_names: tuple
    column_of: tuple

    @classmethod
    def fit(cls, dataset: Dataset, rows=None, columns=None) -> "Encoder":
        if rows is None:
            rows = np.arange(dataset.row_count)
        rows = np.asarray(rows)
        if len(rows) == 0:
            raise ValueError("fit rows must be non-empty")
        columns = tuple(columns) if columns is not None else dataset.schema.names
        cat_levels, num_stats = {}, {}
        names, column_of = [], []
        for name in columns:
            col = dataset.columns[name]
            if isinstance(col, CategoricalColumn):
                codes = col.codes[rows]
                seen = []
                for code in codes:
                    if code >= 0 and col.levels[code] not in seen:
                        seen.append(col.levels[code])
                cat_levels[name] = tuple(seen)
                for lv in seen:
                    names.append(f"{name}={lv}")
                    column_of.append(name)
                names.append(f"{name}=(missing)")
                column_of.append(name)
            else:
                vals = col.values[rows]
                vals = vals[~np.isnan(vals)]
                mean = float(np.mean(vals)) if len(vals) else 0.0
                sd = float(np.std(vals)) if len(vals) > 1 else 0.0
                num_stats[name] = (mean, sd if sd > 0 else 1.0)
                names.append(name)
                column_of.append(name)
                names.append(f"{name}?missing")
                column_of.append(name)
        return cls(columns=columns, cat_levels=cat_levels, num_stats=num_stats,
                   feature_names=tuple(names), column_of=tuple(column_of))

    def transform(self, dataset: Dataset) -> FeatureMatrix:
        n = dataset.row_count
        blocks = []
        for name in self.columns:
            col = dataset.columns[name]
            if name in self.cat_levels:
                levels = self.cat_levels[name]
                lookup = {lv: i for i, lv in enumerate(levels)}
                block = np.zeros((n, len(levels) + 1))
                codes = col.codes
                for code, lv in enumerate(col.levels):
                    j = lookup.get(lv)
                    if j is not None:
                        block[codes == code, j] = 1.0
                    else:
                        block[codes == code, len(levels)] = 1.0   # unseen level
                block[codes < 0, len(levels)] = 1.0
                blocks.append(block)
            else:
                mean, scale = self.num_stats[name]
                vals = col.values
                missing = np.isnan(vals)
                std = np.where(missing, 0.0, (np.where(missing, mean, vals) - mean) / scale)
                blocks.append(np.column_stack([std, missing.astype(np.float64)]))
        return FeatureMatrix(feature_names=self.feature_names,
                             column_of=self.column_of,
                             values=np.hstack(blocks) if blocks else np.zeros((n, 0)))


def encode(dataset: Dataset, fit_rows=None, columns=None) -> FeatureMatrix:
    """Fit an encoder on ``fit_rows`` of a dataset and transform all its rows."""
    return Encoder.fit(dataset, rows=fit_rows, columns=columns).transform(dataset)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_grad(w, b, X, y, l2):
    """Mean log-loss with L2 penalty on w (not b), and its gradient."""
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss += 0.5 * l2 * float(w @ w)
    r = (p - y) / len(y)
    return loss, X.T @ r + l2 * w, float(np.sum(r))


def _spectral_norm_sq(X, iters=64):
    v = np.ones(X.shape[1]) / math.sqrt(max(X.shape[1], 1))
    for _ in range(iters):
        u = X @ v
        v = X.T @ u
        norm = np.linalg.norm(v)
        if norm == 0:
            return 0.0
        v /= norm
    return float(np.linalg.norm(X @ v) ** 2 / max(float(v @ v), 1e-30))


def _fit_logistic(X, y, l2, max_iter):
    """Nesterov-accelerated full-batch gradient descent, fixed budget."""
    n, d = X.shape
    lipschitz = _spectral_norm_sq(X) / (4.0 * n) + l2 + 0.25
    step = 1.0 / lipschitz
    w = np.zeros(d)
    b = 0.0
    wv, bv = w, b
    t_prev = 1.0
    for _ in range(max_iter):
        _, gw, gb = logistic_loss_grad(wv, bv, X, y, l2)
        w_new = wv - step * gw
        b_new = bv - step * gb
        t = (1.0 + math.sqrt(1.0 + 4.0 * t_prev * t_prev)) / 2.0
        beta = (t_prev - 1.0) / t
        wv = w_new + beta * (w_new - w)
        bv = b_new + beta * (b_new - b)
        w, b, t_prev = w_new, b_new, t
    return w, b


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    left_value: float
    right_value: float
    gain: float


def _stump_thresholds(X):
    """Candidate cut points per feature (quantile midpoints, at most 16)."""
    cuts = []
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        if len(vals) < 2:
            cuts.append(np.empty(0))
            continue
        if len(vals) - 1 <= MAX_THRESHOLDS:
            mid = (vals[:-1] + vals[1:]) / 2.0
        else:
            qs = np.quantile(X[:, j], np.arange(1, MAX_THRESHOLDS + 1) / (MAX_THRESHOLDS + 1))
            mid = np.unique(qs)
            mid = mid[(mid > vals[0]) & (mid < vals[-1])]
        cuts.append(mid)
    return cuts


def _fit_stumps(X, y, rounds, learning_rate, objective):
    n = len(y)
    cuts = _stump_thresholds(X)
    bin_ids = [
        np.searchsorted(c, X[:, j], side="right") if len(c) else None
        for j, c in enumerate(cuts)
    ]
    if objective == "logistic":
        pbar = min(max(float(np.mean(y)), 1e-6), 1 - 1e-6)
        f0 = math.log(pbar / (1.0 - pbar))
    else:
        f0 = float(np.mean(y))
    F = np.full(n, f0)
    stumps = []
    for _ in range(rounds):
        if objective == "logistic":
            p = _sigmoid(F)
            g = p - y
            h = p * (1.0 - p)
        else:
            g = F - y
            h = np.ones(n)
        g_total, h_total = float(np.sum(g)), float(np.sum(h))
        base = g_total * g_total / (h_total + STUMP_LAMBDA)
        best = None
        for j, c in enumerate(cuts):
            if len(c) == 0:
                continue
            k = len(c) + 1
            gs = np.bincount(bin_ids[j], weights=g, minlength=k)
            hs = np.bincount(bin_ids[j], weights=h, minlength=k)
            gl = np.cumsum(gs)[:-1]
            hl = np.cumsum(hs)[:-1]
            gr = g_total - gl
            hr = h_total - hl
            gains = gl * gl / (hl + STUMP_LAMBDA) + gr * gr / (hr + STUMP_LAMBDA) - base
            cut = int(np.argmax(gains))
            if best is None or gains[cut] > best[0]:
                best = (float(gains[cut]), j, cut,
                        float(gl[cut]), float(hl[cut]),
                        float(gr[cut]), float(hr[cut]))
        if best is None or best[0] <= 1e-12:
            break
        gain, j, cut, gl, hl, gr, hr = best
        left = -learning_rate * gl / (hl + STUMP_LAMBDA)
        right = -learning_rate * gr / (hr + STUMP_LAMBDA)
        stumps.append(Stump(feature=j, threshold=float(cuts[j][cut]),
                            left_value=left, right_value=right, gain=gain))
        F = F + np.where(bin_ids[j] <= cut, left, right)
    return f0, stumps


def _stump_scores(f0, stumps, X):
    F = np.full(X.shape[0], f0)
    for s in stumps:
        F += np.where(X[:, s.feature] <= s.threshold, s.left_value, s.right_value)
    return F


@dataclass(frozen=True)
class TrainedClassifier:
    family: str                       # logistic | boosted_stumps
    objective: str                    # logistic | squared
    feature_names: tuple
    column_of: tuple
    training_seed: int
    coef: np.ndarray | None = None
    intercept: float = 0.0
    f0: float = 0.0
    stumps: tuple = ()
    encoder: Encoder | None = None
    hyperparams: dict = field(default_factory=dict)

    def decision_scores(self, features) -> np.ndarray:
        X = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
        if self.family == "logistic":
            return X @ self.coef + self.intercept
        return _stump_scores(self.f0, self.stumps, X)

    def predict_proba(self, features) -> np.ndarray:
        z = self.decision_scores(features)
        return _sigmoid(z) if self.objective == "logistic" else z


def _stratified_split(y, frac, rng):
    val = []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        take = max(1, int(round(frac * len(idx))))
        val.append(idx[:take])
    val_idx = np.sort(np.concatenate(val))
    mask = np.ones(len(y), dtype=bool)
    mask[val_idx] = False
    return np.flatnonzero(mask), val_idx


def train(features: FeatureMatrix, labels, family: str = "logistic",
          hyperparams: dict | None = None, seed: int = 0,
          objective: str = "logistic") -> TrainedClassifier:
    """Fit a classifier; deterministic for a given seed.

    When the hyperparameter grid has more than one point, an 80/20 stratified
    validation split (seeded) picks the best point by validation AUC and the
    winner is refit on all rows.
    """
    X = features.values
    y = np.asarray(labels, dtype=np.float64)
    if objective == "logistic" and (np.all(y == y[0])):
        raise SingleClass("training labels contain a single class")
    hp = dict(hyperparams or {})

    def fit_one(Xf, yf, point):
        if family == "logistic":
            w, b = _fit_logistic(Xf, yf, l2=point, max_iter=hp.get("max_iter", 300))
            return {"coef": w, "intercept": b}
        rounds, lr = point
        f0, stumps = _fit_stumps(Xf, yf, rounds, lr, objective)
        return {"f0": f0, "stumps": tuple(stumps)}

    if family == "logistic":
        grid = [hp["l2"]] if "l2" in hp else list(hp.get("l2_grid", DEFAULT_L2_GRID))
    elif family == "boosted_stumps":
        if "rounds" in hp:
            grid = [(hp["rounds"], hp.get("learning_rate", 0.1))]
        else:
            grid = [tuple(g) for g in hp.get("grid", DEFAULT_STUMP_GRID)]
    else:
        raise ValueError(f"unknown model family {family!r}")

    chosen = grid[0]
    if len(grid) > 1:
        rng = np.random.default_rng(seed)
        if objective == "logistic":
            tr, va = _stratified_split(y, 0.2, rng)
        else:
            perm = rng.permutation(len(y))
            cut = max(1, int(round(0.2 * len(y))))
            va, tr = np.sort(perm[:cut]), np.sort(perm[cut:])
        best_auc = -1.0
        for point in grid:
            params = fit_one(X[tr], y[tr], point)
            probe = TrainedClassifier(
                family=family, objective=objective,
                feature_names=features.feature_names,
                column_of=features.column_of, training_seed=seed, **params)
            scores = probe.decision_scores(X[va])
            auc = roc_auc(scores, y[va]) if objective == "logistic" \
                else -float(np.mean((scores - y[va]) ** 2))
            if auc > best_auc:
                best_auc, chosen = auc, point

    params = fit_one(X, y, chosen)
    return TrainedClassifier(
        family=family, objective=objective,
        feature_names=features.feature_names, column_of=features.column_of,
        training_seed=seed, hyperparams={"selected": chosen}, **params)


def train_on_dataset(dataset: Dataset, labels, columns, family="logistic",
                     hyperparams=None, seed=0, objective="logistic",
                     fit_rows=None) -> TrainedClassifier:
    """Encode the given columns (encoder fit on fit_rows) and train."""
    encoder = Encoder.fit(dataset, rows=fit_rows, columns=columns)
    feats = encoder.transform(dataset)
    if fit_rows is not None:
        feats = FeatureMatrix(feats.feature_names, feats.column_of,
                              feats.values[np.asarray(fit_rows)])
        labels = np.asarray(labels)[np.asarray(fit_rows)]
    model = train(feats, labels, family=family, hyperparams=hyperparams,
                  seed=seed, objective=objective)
    return TrainedClassifier(
        family=model.family, objective=model.objective,
        feature_names=model.feature_names, column_of=model.column_of,
        training_seed=model.training_seed, coef=model.coef,
        intercept=model.intercept, f0=model.f0, stumps=model.stumps,
        encoder=encoder, hyperparams=model.hyperparams)


def roc_auc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) ROC-AUC with midrank tie handling."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC-AUC needs both classes")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    _uniq, inverse, counts = np.unique(scores[order], return_inverse=True,
                                       return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    ranks[order] = starts[inverse] + (counts[inverse] - 1) / 2.0 + 1.0
    pos_sum = float(np.sum(ranks[y == 1]))
    return (pos_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_curve(scores, labels) -> dict:
    """ROC points swept over descending score thresholds."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    order = np.argsort(-scores, kind="mergesort")
    y_sorted = y[order]
    s_sorted = scores[order]
    tps = np.cumsum(y_sorted == 1)
    fps = np.cumsum(y_sorted == 0)
    keep = np.concatenate([np.diff(s_sorted) != 0, [True]])
    tps, fps, thr = tps[keep], fps[keep], s_sorted[keep]
    n_pos = max(int(np.sum(y == 1)), 1)
    n_neg = max(int(np.sum(y == 0)), 1)
    return {
        "fpr": [0.0] + [float(v) / n_neg for v in fps],
        "tpr": [0.0] + [float(v) / n_pos for v in tps],
        "thresholds": [float(thr[0]) + 1.0] + [float(t) for t in thr],
    }


def feature_importance(model: TrainedClassifier) -> list:
    """Non-negative importance per parent column, sorted descending.

    Logistic models use summed absolute coefficients (features are
    standardized, so magnitudes are comparable); stump ensembles use total
    loss-reduction gain.  Indicator importances are summed back to the parent
    column; ties keep the encoder's column order.
    """
    per_feature = np.zeros(len(model.feature_names))
    if model.family == "logistic":
        per_feature = np.abs(model.coef)
    else:
        for s in model.stumps:
            per_feature[s.feature] += s.gain
    totals = {}
    for name, imp in zip(model.column_of, per_feature):
        totals[name] = totals.get(name, 0.0) + float(imp)
    order = {name: i for i, name in enumerate(dict.fromkeys(model.column_of))}
    return sorted(totals.items(), key=lambda kv: (-kv[1], order[kv[0]]))


def ndcg(reference_importance, candidate_ranking) -> float:
    """Normalized discounted cumulative gain of a candidate feature ranking.

    Relevance of each feature is its reference importance; the discount is
    log2(rank + 1); the normalizer is the DCG of the reference's own
    descending order.  Defined as 1.0 when every relevance is zero.
    """
    rel = {name: float(v) for name, v in reference_importance}
    candidate = list(candidate_ranking)
    if set(rel) != set(candidate) or len(candidate) != len(rel):
        raise FeatureMismatch("candidate ranking must cover exactly the reference features")
    dcg = sum(rel[f] / math.log2(i + 2) for i, f in enumerate(candidate))
    ideal = sum(v / math.log2(i + 2)
                for i, v in enumerate(sorted(rel.values(), reverse=True)))
    return dcg / ideal if ideal > 0 else 1.0
