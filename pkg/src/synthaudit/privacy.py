"""Privacy attack simulations and copy-protection metrics.

Implements membership inference on a split real table, a file-membership
hypothesis test, attribute inference over quasi-identifier equivalence
classes, distance-to-closest-record summaries with the small-class high-risk
rule, and canary-exposure analysis for generators that can score records.
"""
from __future__ import annotations

import csv
import math
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .binning import bin_views
from .data import Dataset, concat_datasets, take_rows, write_csv
from .distance import DistanceConfig, all_nearest
from .errors import (AdapterNoScore, EmptyInput, EmptyQuasi, EmptySplit,
                     EmptySynthetic, NoTrials, RankOutOfRange, TargetIsQuasi,
                     UnknownColumn)
from .models import Encoder, train

MEMBERSHIP_THRESHOLD_OFFSETS = (0, 1, 2, 3, 5)
HIGH_RISK_CLASS_SIZE = 5
LAMBDA_VARIANTS = ("reference_paper", "conservative", "no_errors")


# ---------------------------------------------------------------------------
# membership inference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdRow:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float


@dataclass(frozen=True)
class MembershipCurve:
    thresholds: tuple              # ThresholdRow per attack threshold
    base_threshold: float          # minimal nearest-neighbor distance H
    mi_risk_score: float           # (precision - 0.5) * 2 at the score threshold
    score_threshold: float         # first threshold reaching recall >= 0.5
    recall_target_reached: bool
    attacker_fraction: float
    n_queries: int
    n_members: int


def _scan_config(config, query_ds, target_ds):
    """Attach a shared binned view pair (edges fit on the query side)."""
    config = config or DistanceConfig()
    if config.mode != "hamming_binned" or config.binning is not None:
        return config
    vq, vt = bin_views([query_ds, target_ds], n_bins=config.n_bins, fit_on=(0,))
    return DistanceConfig(mode=config.mode, weights=config.weights,
                          binning=(vq, vt), n_bins=config.n_bins)


def membership_inference(r1: Dataset, r2: Dataset, s1: Dataset,
                         attacker_fraction: float = 1.0, seed: int = 0,
                         distance: DistanceConfig | None = None,
                         jobs: int = 1) -> MembershipCurve:
    """Simulated membership-inference attack against a split real table.

    The attacker holds a seeded sample of the pooled halves, finds each
    record's nearest synthetic neighbor, and declares membership when that
    distance falls at or under a ladder of thresholds H, H+1, H+2, H+3, H+5,
    where H is the smallest observed nearest-neighbor distance.  The summary
    risk score rescales precision at the first threshold reaching 50% recall.
    """
    if r1.row_count == 0 or r2.row_count == 0:
        raise EmptySplit("both halves of the real table must be non-empty")
    if s1.row_count == 0:
        raise EmptySynthetic("synthetic table is empty")
    if not 0.0 < attacker_fraction <= 1.0:
        raise ValueError("attacker_fraction must be in (0, 1]")

    queries = concat_datasets(r1, r2)
    member = np.concatenate([
        np.ones(r1.row_count, dtype=bool), np.zeros(r2.row_count, dtype=bool)])
    n = queries.row_count
    if attacker_fraction < 1.0:
        rng = np.random.default_rng(seed)
        take = max(1, int(round(attacker_fraction * n)))
        sample = np.sort(rng.permutation(n)[:take])
    else:
        sample = np.arange(n)
    member = member[sample]
    if not member.any() or member.all():
        raise EmptySplit("attacker sample must contain records from both halves")

    sampled = take_rows(queries, sample)
    config = _scan_config(distance, sampled, s1)
    results = all_nearest(sampled, s1, config, jobs=jobs)
    dists = np.array([r.distance for r in results])

    base = float(np.min(dists))
    rows = []
    score = None
    score_threshold = None
    reached = False
    n_members = int(np.sum(member))
    for offset in MEMBERSHIP_THRESHOLD_OFFSETS:
        th = base + offset
        declared = dists <= th + 1e-12
        tp = int(np.sum(declared & member))
        fp = int(np.sum(declared & ~member))
        fn = int(np.sum(~declared & member))
        tn = int(np.sum(~declared & ~member))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / n_members
        rows.append(ThresholdRow(threshold=float(th), tp=tp, fp=fp, tn=tn,
                                 fn=fn, precision=precision, recall=recall))
        if score is None and recall >= 0.5:
            score = (precision - 0.5) * 2.0
            score_threshold = float(th)
            reached = True
    if score is None:
        score = (rows[-1].precision - 0.5) * 2.0
        score_threshold = rows[-1].threshold
    return MembershipCurve(
        thresholds=tuple(rows), base_threshold=base, mi_risk_score=float(score),
        score_threshold=score_threshold, recall_target_reached=reached,
        attacker_fraction=attacker_fraction, n_queries=len(sample),
        n_members=n_members,
    )


# ---------------------------------------------------------------------------
# file membership
# ---------------------------------------------------------------------------

def file_membership_trial(r1: Dataset, r2: Dataset, s1: Dataset, s2: Dataset,
                          distance: DistanceConfig | None = None,
                          seed: int = 0, jobs: int = 1) -> float:
    """One file-membership round: assign each real record to the synthetic
    file holding its closer nearest neighbor; return the correct fraction.
    Equal distances are resolved by a seeded coin flip."""
    for ds, label in ((r1, "r1"), (r2, "r2"), (s1, "s1"), (s2, "s2")):
        if ds.row_count == 0:
            raise EmptyInput(f"{label} is empty")
    if abs(r1.row_count - r2.row_count) > 1:
        raise ValueError("halves must be equal in size (within one record)")
    queries = concat_datasets(r1, r2)
    config = distance or DistanceConfig()
    if config.mode == "hamming_binned" and config.binning is None:
        vq, v1, v2 = bin_views([queries, s1, s2], n_bins=config.n_bins,
                               fit_on=(0,))
        cfg1 = DistanceConfig(config.mode, config.weights, (vq, v1), config.n_bins)
        cfg2 = DistanceConfig(config.mode, config.weights, (vq, v2), config.n_bins)
    else:
        cfg1 = cfg2 = config
    d1 = np.array([r.distance for r in all_nearest(queries, s1, cfg1, jobs=jobs)])
    d2 = np.array([r.distance for r in all_nearest(queries, s2, cfg2, jobs=jobs)])
    in_first = np.concatenate([
        np.ones(r1.row_count, dtype=bool), np.zeros(r2.row_count, dtype=bool)])
    rng = np.random.default_rng(seed)
    flips = rng.random(queries.row_count) < 0.5
    say_first = np.where(d1 == d2, flips, d1 < d2)
    return float(np.mean(say_first == in_first))


@dataclass(frozen=True)
class HTestResult:
    p_hat: float
    z: float
    p_value: float
    verdict: str                   # low_risk | high_risk
    n_decisions: int


def file_membership_htest(trial_fractions, per_trial_n, alpha: float = 0.05) -> HTestResult:
    """Two-sided normal test of the pooled correct-guess rate against 1/2.

    The verdict is ``low_risk`` when the test fails to reject 1/2, meaning
    file membership cannot be guessed better than a coin toss.
    """
    fractions = np.asarray(trial_fractions, dtype=np.float64)
    ns = np.asarray(per_trial_n, dtype=np.float64)
    if len(fractions) == 0:
        raise NoTrials("at least one trial is required")
    if len(fractions) != len(ns):
        raise ValueError("trial_fractions and per_trial_n lengths differ")
    total = float(np.sum(ns))
    p_hat = float(np.sum(fractions * ns) / total)
    z = (p_hat - 0.5) / math.sqrt(0.25 / total)
    p_value = math.erfc(abs(z) / math.sqrt(2.0))
    verdict = "low_risk" if p_value >= alpha else "high_risk"
    return HTestResult(p_hat=p_hat, z=float(z), p_value=float(p_value),
                       verdict=verdict, n_decisions=int(total))


# ---------------------------------------------------------------------------
# attribute inference
# ---------------------------------------------------------------------------

def lambda_prime(variant: str, k: int) -> float:
    """Match-error adjustment factor for k quasi-identifier fields."""
    if variant == "reference_paper":
        return (1.0 + (0.23 * (1.0 - 0.0426)) ** k) / 2.0
    if variant == "conservative":
        return 0.8
    if variant == "no_errors":
        return 1.0
    raise ValueError(f"unknown lambda variant {variant!r}")


@dataclass(frozen=True)
class AttributeInferenceResult:
    target: str
    quasi: tuple
    risks: dict                    # variant -> risk in [0, 1]
    lambdas: dict                  # variant -> lambda factor used
    f: np.ndarray                  # per real record: equivalence class size
    matched: np.ndarray            # per real record: has a synthetic match
    correct: np.ndarray            # per real record: 0, 0.5 or 1
    match_rate: float
    mode: str
    match: str


def _mode_code(codes):
    vals, counts = np.unique(codes, return_counts=True)
    return int(vals[np.argmax(counts)])   # ties go to the smallest code


def _predict_codes(synthetic, real, quasi, syn_codes, seed):
    """Model-based inference: one-vs-rest classifiers on the synthetic table."""
    encoder = Encoder.fit(synthetic, columns=quasi)
    feats_syn = encoder.transform(synthetic)
    feats_real = encoder.transform(real)
    classes = np.unique(syn_codes)
    if len(classes) == 1:
        return np.full(real.row_count, int(classes[0]))
    scores = np.full((real.row_count, len(classes)), -np.inf)
    for j, cls in enumerate(classes):
        y = (syn_codes == cls).astype(np.float64)
        model = train(feats_syn, y, family="logistic",
                      hyperparams={"l2": 0.1}, seed=seed)
        scores[:, j] = model.decision_scores(feats_real)
    best = np.argmax(scores, axis=1)   # ties: first class = smallest code
    return classes[best].astype(np.int64)


def attribute_inference(real: Dataset, synthetic: Dataset, quasi, target: str,
                        mode: str = "mode_median", match: str = "exact",
                        tolerance: int = 1, missing_weight: float = 0.5,
                        gvf_threshold: float = 0.8, k_max: int = 20,
                        seed: int = 0) -> AttributeInferenceResult:
    """Attribute-inference disclosure risk for one sensitive target column.

    Numeric columns are discretized with Jenks breaks fit on the real table
    (smallest class count whose goodness-of-variance fit reaches the
    threshold).  For every real record: ``f`` is its quasi-identifier
    equivalence class size in the real table, ``matched`` says whether any
    synthetic record shares its (binned) quasi values, and ``correct`` says
    whether the attacker's inferred target value (mode for categoricals,
    median for numerics, or a model prediction) equals the record's binned
    target value; a correct guess of a missing cell is down-weighted.  Each
    lambda variant scales the per-record 1/f contributions into a risk.
    """
    quasi = list(quasi)
    if not quasi:
        raise EmptyQuasi("at least one quasi-identifier column is required")
    if target in quasi:
        raise TargetIsQuasi(f"target {target!r} is a quasi-identifier")
    for name in [*quasi, target]:
        if name not in real.schema:
            raise UnknownColumn(name)
    if mode not in ("mode_median", "model"):
        raise ValueError(f"unknown inference mode {mode!r}")
    if match not in ("exact", "approximate"):
        raise ValueError(f"unknown match kind {match!r}")

    needed = [*quasi, target]
    view_r, view_s = bin_views([real, synthetic], method="jenks",
                               fit_on=(0,), gvf_threshold=gvf_threshold,
                               k_max=k_max, columns=needed)
    q_real = view_r.code_matrix(quasi)
    q_syn = view_s.code_matrix(quasi)
    t_real = view_r.codes[target]
    t_syn = view_s.codes[target]

    # equivalence class sizes in the real table
    _, inverse, counts = np.unique(q_real, axis=0, return_inverse=True,
                                   return_counts=True)
    f = counts[inverse].astype(np.float64)

    # index synthetic rows by quasi tuple
    groups = {}
    for i, row in enumerate(map(tuple, q_syn)):
        groups.setdefault(row, []).append(i)

    numeric_quasi = [j for j, name in enumerate(quasi)
                     if real.schema.column(name).is_numeric]

    def matches_for(row):
        if match == "exact" or not numeric_quasi:
            return groups.get(tuple(row), ())
        out = []
        offsets = [0]
        for d in range(1, tolerance + 1):
            offsets.extend((d, -d))
        def expand(idx, current):
            if idx == len(numeric_quasi):
                out.extend(groups.get(tuple(current), ()))
                return
            j = numeric_quasi[idx]
            if current[j] < 0:      # missing quasi bins only match missing
                expand(idx + 1, current)
                return
            base = current[j]
            for off in offsets:
                current[j] = base + off
                expand(idx + 1, current)
            current[j] = base
        expand(0, list(row))
        return sorted(set(out))

    target_numeric = real.schema.column(target).is_numeric
    syn_target_values = synthetic.columns[target].values if target_numeric else None
    target_edges = view_r.bin_edges.get(target)

    matched = np.zeros(real.row_count, dtype=bool)
    inferred = np.full(real.row_count, -2, dtype=np.int64)   # -2: no inference
    if mode == "model":
        predictions = _predict_codes(synthetic, real, quasi, t_syn, seed)
    for i, row in enumerate(map(tuple, q_real)):
        idx = matches_for(np.asarray(row))
        if len(idx) == 0:
            continue
        matched[i] = True
        if mode == "model":
            inferred[i] = predictions[i]
        elif target_numeric:
            vals = syn_target_values[list(idx)]
            vals = vals[~np.isnan(vals)]
            if len(vals) == 0:
                inferred[i] = -1
            else:
                med = float(np.median(vals))
                inferred[i] = int(np.searchsorted(target_edges, med, side="right"))
        else:
            inferred[i] = _mode_code(t_syn[list(idx)])

    correct = np.where(
        matched & (inferred == t_real),
        np.where(t_real < 0, missing_weight, 1.0),
        0.0,
    )
    contributions = matched * correct / f
    risks, lambdas = {}, {}
    for variant in LAMBDA_VARIANTS:
        lam = lambda_prime(variant, len(quasi))
        lambdas[variant] = lam
        risks[variant] = float(np.mean(lam * contributions))
    return AttributeInferenceResult(
        target=target, quasi=tuple(quasi), risks=risks, lambdas=lambdas,
        f=f, matched=matched, correct=correct,
        match_rate=float(np.mean(matched)), mode=mode, match=match,
    )


@dataclass(frozen=True)
class AttributeInferenceSuite:
    per_target: dict               # target -> AttributeInferenceResult
    totals: dict                   # variant -> overall risk (max over targets)


def attribute_inference_suite(real, synthetic, quasi, targets,
                              **kwargs) -> AttributeInferenceSuite:
    """Risk per sensitive target plus the overall per-record-max totals."""
    per_target = {
        t: attribute_inference(real, synthetic, quasi, t, **kwargs)
        for t in targets
    }
    totals = {}
    if per_target:
        stacked = np.vstack([
            res.matched * res.correct / res.f for res in per_target.values()
        ])
        best = stacked.max(axis=0)
        for variant in LAMBDA_VARIANTS:
            lam = lambda_prime(variant, len(list(quasi)))
            totals[variant] = float(np.mean(lam * best))
    else:
        totals = {v: 0.0 for v in LAMBDA_VARIANTS}
    return AttributeInferenceSuite(per_target=per_target, totals=totals)


# ---------------------------------------------------------------------------
# distance to closest record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DcrSummary:
    syn_to_real: dict              # histogram of DCR(real record -> synthetic)
    real_to_real: dict             # self-excluded baseline histogram
    min_dcr: float
    r0_count: int
    high_risk_count: int
    high_risk_fraction: float
    n_real: int
    eq_class_columns: tuple        # () means the full record
    dcr_values: np.ndarray
    baseline_values: np.ndarray
    high_risk_rows: np.ndarray


def _histogram(values, integral, edges=None):
    if integral:
        top = int(np.max(values)) if len(values) else 0
        counts = np.bincount(values.astype(np.int64), minlength=top + 1)
        return {"bins": list(range(top + 1)), "counts": [int(c) for c in counts]}
    if edges is None:
        hi = float(np.max(values)) if len(values) else 1.0
        edges = np.linspace(0.0, max(hi, 1e-9), 51)
    counts, edges = np.histogram(values, bins=edges)
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def dcr_summary(real: Dataset, synthetic: Dataset, quasi_for_eq_class=None,
                distance: DistanceConfig | None = None,
                jobs: int = 1) -> DcrSummary:
    """Distance-to-closest-record distributions and the DCR=0 risk rule.

    Every real record's distance to its closest synthetic record is compared
    with the self-excluded real-to-real baseline.  Records at DCR=0 whose
    equivalence class (full binned record by default) has five or fewer
    members count as high risk; the verdict threshold is 1% of the real table.
    """
    if synthetic.row_count == 0:
        raise EmptySynthetic("synthetic table is empty")
    config = distance or DistanceConfig(mode="enhanced_gower")
    if config.mode == "hamming_binned" and config.binning is None:
        vr, vs = bin_views([real, synthetic], n_bins=config.n_bins, fit_on=(0,))
        cfg_rs = DistanceConfig(config.mode, config.weights, (vr, vs), config.n_bins)
        cfg_rr = DistanceConfig(config.mode, config.weights, (vr, vr), config.n_bins)
    else:
        cfg_rs = cfg_rr = config
    dcr = np.array([
        r.distance for r in all_nearest(real, synthetic, cfg_rs, jobs=jobs)])
    baseline = np.array([
        r.distance
        for r in all_nearest(real, real, cfg_rr, self_mode=True, jobs=jobs)])

    # equivalence classes on the binned real table
    eq_columns = tuple(quasi_for_eq_class or ())
    view_r, = bin_views([real], n_bins=config.n_bins)
    key_cols = eq_columns if eq_columns else real.schema.names
    key = view_r.code_matrix(key_cols)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True,
                                   return_counts=True)
    class_size = counts[inverse]

    r0 = dcr == 0.0
    high_risk = r0 & (class_size <= HIGH_RISK_CLASS_SIZE)
    integral = config.mode == "hamming_binned"
    if integral:
        hist_s = _histogram(dcr, True)
        hist_r = _histogram(baseline, True)
    else:
        hi = float(max(dcr.max() if len(dcr) else 0.0,
                       baseline.max() if len(baseline) else 0.0, 1e-9))
        edges = np.linspace(0.0, hi, 51)
        hist_s = _histogram(dcr, False, edges)
        hist_r = _histogram(baseline, False, edges)
    return DcrSummary(
        syn_to_real=hist_s, real_to_real=hist_r,
        min_dcr=float(np.min(dcr)) if len(dcr) else 0.0,
        r0_count=int(np.sum(r0)),
        high_risk_count=int(np.sum(high_risk)),
        high_risk_fraction=float(np.mean(high_risk)) if len(dcr) else 0.0,
        n_real=real.row_count, eq_class_columns=eq_columns,
        dcr_values=dcr, baseline_values=baseline,
        high_risk_rows=np.flatnonzero(high_risk),
    )


# ---------------------------------------------------------------------------
# exposure / canaries
# ---------------------------------------------------------------------------

def exposure(rank: int, canary_space_size: int) -> float:
    """Memorization exposure of a canary ranked among all possible canaries."""
    if canary_space_size < 1:
        raise ValueError("canary space must be non-empty")
    if not 1 <= rank <= canary_space_size:
        raise RankOutOfRange(
            f"rank {rank} outside [1, {canary_space_size}]")
    return math.log2(canary_space_size) - math.log2(rank)


@dataclass(frozen=True)
class GridCanarySpace:
    """Cartesian grid of out-of-distribution cell values.

    ``column_values`` maps column name to candidate text values; a canary id
    enumerates the grid in mixed-radix order.  ``base_record`` fills every
    other column.
    """
    column_values: dict
    base_record: dict

    def __len__(self) -> int:
        size = 1
        for vals in self.column_values.values():
            size *= len(vals)
        return size

    def record(self, canary_id: int) -> dict:
        rec = dict(self.base_record)
        rem = canary_id
        for name, vals in self.column_values.items():
            rem, pos = divmod(rem, len(vals))
            rec[name] = vals[pos]
        return rec


class SubprocessGeneratorAdapter:
    """Bridge to an external generator command.

    Protocol: ``<cmd> train --in <csv> --out <csv> --seed <n>`` and
    ``<cmd> score --in <csv>`` printing one log-perplexity per data row.
    """

    def __init__(self, command, can_score: bool = True):
        self.command = list(command)
        self.can_score = can_score

    def train(self, training_csv, out_csv, seed: int) -> None:
        subprocess.run(
            [*self.command, "train", "--in", str(training_csv),
             "--out", str(out_csv), "--seed", str(seed)],
            check=True, capture_output=True)

    def score(self, records_csv) -> np.ndarray:
        if not self.can_score:
            raise AdapterNoScore("generator does not support scoring")
        proc = subprocess.run(
            [*self.command, "score", "--in", str(records_csv)],
            check=True, capture_output=True, text=True)
        return np.array([float(line) for line in proc.stdout.split()])


@dataclass(frozen=True)
class CanaryCampaignResult:
    mean_exposure: float
    exposures: tuple
    ranks: tuple
    threshold: float               # log2 of the canary space size
    verdict: str                   # low_risk | high_risk
    canary_ids: tuple
    space_size: int


def canary_campaign(real: Dataset, adapter, n_canaries: int, canary_space,
                    seed: int = 0, workdir=None) -> CanaryCampaignResult:
    """Inject seeded canaries, retrain, and rank them among all candidates.

    Candidates are ordered by the adapter's log-perplexity (lower is more
    likely, rank 1); ties fall back to canonical canary order.  The verdict is
    high risk when mean exposure reaches the log2(space) threshold, which only
    a top-ranked canary can do.
    """
    size = len(canary_space)
    if n_canaries < 1:
        raise EmptyInput("at least one canary is required")
    if n_canaries > size:
        raise ValueError("more canaries requested than the space holds")
    if not hasattr(adapter, "score") or not getattr(adapter, "can_score", True):
        raise AdapterNoScore("adapter cannot score records")

    rng = np.random.default_rng(seed)
    ids = np.sort(rng.permutation(size)[:n_canaries])
    base = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="synthaudit_canary_"))
    base.mkdir(parents=True, exist_ok=True)
    train_csv = base / "training_with_canaries.csv"
    synth_csv = base / "synthetic.csv"
    candidates_csv = base / "candidates.csv"

    write_csv(real, train_csv,
              extra_rows=[canary_space.record(int(i)) for i in ids])
    adapter.train(train_csv, synth_csv, seed)

    names = real.schema.names
    with open(candidates_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for cid in range(size):
            rec = canary_space.record(cid)
            writer.writerow([rec.get(name, "") for name in names])
    scores = np.asarray(adapter.score(candidates_csv), dtype=np.float64)
    if len(scores) != size:
        raise AdapterNoScore(
            f"adapter returned {len(scores)} scores for {size} candidates")

    order = np.lexsort((np.arange(size), scores))   # score asc, then id
    rank_of = np.empty(size, dtype=np.int64)
    rank_of[order] = np.arange(1, size + 1)
    ranks = [int(rank_of[i]) for i in ids]
    exposures = [exposure(r, size) for r in ranks]
    mean_exposure = float(np.mean(exposures))
    threshold = math.log2(size)
    verdict = "low_risk" if mean_exposure < threshold else "high_risk"
    return CanaryCampaignResult(
        mean_exposure=mean_exposure, exposures=tuple(exposures),
        ranks=tuple(ranks), threshold=threshold, verdict=verdict,
        canary_ids=tuple(int(i) for i in ids), space_size=size,
    )
