"""Audit orchestration: configuration, metric blocks, verdicts and the
machine-readable report.

Reports are deterministic: given the same config and seed the serialized JSON
is byte-identical across runs and across worker counts (blocks run
concurrently but merge in a fixed order, and no wall-clock timestamp is
embedded unless explicitly requested).
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .data import Dataset, load_csv, population_stats
from .distance import DistanceConfig
from .errors import ConfigInvalid, SynthAuditError
from .multivariate import (consistency_rate, correlation_pair,
                           discriminator_metrics, kaplan_meier, log_rank, pcd,
                           tstr_compare)
from .privacy import (attribute_inference_suite, dcr_summary,
                      file_membership_htest, file_membership_trial,
                      membership_inference)
from .rules import parse_rules_file
from .schema import Schema, load_schema
from .univariate import marginal_report, support_coverage

REPORT_VERSION = "1"

STANDING_WARNINGS = (
    "pmse uses the squared deviation (p - c)^2; the printed propensity-score "
    "formula omits the square",
    "pcd_l1/pcd_l2 are normalized means over the strict upper triangle; raw "
    "matrix norms are reported alongside as pcd_l1_raw/pcd_l2_raw",
    "file-membership verdict is 'low risk' when the test FAILS to reject "
    "P = 1/2; the source framing inverts the null",
)


@dataclass(frozen=True)
class Thresholds:
    mi_risk: float = 0.2            # PASS when score < threshold
    attribute_risk: float = 0.05    # PASS when risk <= threshold
    dcr_high_risk: float = 0.01     # PASS when fraction < threshold
    htest_alpha: float = 0.05       # PASS when p-value >= alpha


@dataclass(frozen=True)
class AuditConfig:
    schema_path: str = ""
    real_path: str = ""
    synthetic_path: str = ""
    fidelity_enabled: bool = True
    privacy_enabled: bool = True
    seed: int = 0
    jobs: int = 1
    bins: int = 10
    out_path: str | None = None
    stamp: bool = False
    # fidelity
    correlation_columns: tuple = ()
    discriminator_enabled: bool = True
    discriminator_family: str = "logistic"
    discriminator_folds: int = 5
    discriminator_repeats: int = 5
    tstr_target: str | None = None
    tstr_predictors: tuple = ()
    tstr_repeats: int = 5
    tstr_family: str = "logistic"
    survival_time: str | None = None
    survival_group: str | None = None
    rules_path: str | None = None
    # privacy
    quasi_identifiers: tuple = ()
    sensitive_targets: tuple = ()
    privacy_distance: str = "hamming_binned"
    dcr_distance: str = "enhanced_gower"
    dcr_eq_class_columns: tuple = ()
    attacker_fractions: tuple = (0.1, 0.25, 0.5, 1.0)
    attr_mode: str = "mode_median"
    attr_match: str = "exact"
    attr_tolerance: int = 1
    attr_missing_weight: float = 0.5
    attr_gvf_threshold: float = 0.8
    attr_k_max: int = 20
    membership_r1: str | None = None
    membership_r2: str | None = None
    membership_s1: str | None = None
    membership_s2: str | None = None
    membership_trials: int = 1
    thresholds: Thresholds = field(default_factory=Thresholds)


def _resolve(base: Path, value):
    if value is None:
        return None
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def load_config(path) -> AuditConfig:
    """Read an audit configuration TOML; paths resolve relative to the file."""
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigInvalid(f"{path}: {e}") from e
    base = path.parent
    data = doc.get("data", {})
    for key in ("schema", "real", "synthetic"):
        if key not in data:
            raise ConfigInvalid(f"{path}: [data] must set {key!r}")
    blocks = doc.get("blocks", {})
    fid = doc.get("fidelity", {})
    disc = fid.get("discriminator", {})
    tstr = fid.get("tstr", {})
    surv = fid.get("survival", {})
    rules = fid.get("rules", {})
    priv = doc.get("privacy", {})
    attr = priv.get("attribute", {})
    dcr = priv.get("dcr", {})
    mem = priv.get("membership", {})
    thr = doc.get("thresholds", {})
    out = doc.get("output", {})
    defaults = Thresholds()
    return AuditConfig(
        schema_path=_resolve(base, data["schema"]),
        real_path=_resolve(base, data["real"]),
        synthetic_path=_resolve(base, data["synthetic"]),
        fidelity_enabled=bool(blocks.get("fidelity", True)),
        privacy_enabled=bool(blocks.get("privacy", True)),
        seed=int(doc.get("seed", 0)),
        jobs=int(doc.get("jobs", 1)),
        bins=int(fid.get("bins", priv.get("bins", 10))),
        out_path=_resolve(base, out.get("report")),
        correlation_columns=tuple(fid.get("correlation_columns", ())),
        discriminator_enabled=bool(disc.get("enabled", True)),
        discriminator_family=str(disc.get("family", "logistic")),
        discriminator_folds=int(disc.get("folds", 5)),
        discriminator_repeats=int(disc.get("repeats", 5)),
        tstr_target=tstr.get("target"),
        tstr_predictors=tuple(tstr.get("predictors", ())),
        tstr_repeats=int(tstr.get("repeats", 5)),
        tstr_family=str(tstr.get("family", "logistic")),
        survival_time=surv.get("time_column"),
        survival_group=surv.get("group_column"),
        rules_path=_resolve(base, rules.get("file")),
        quasi_identifiers=tuple(priv.get("quasi_identifiers", ())),
        sensitive_targets=tuple(priv.get("sensitive_targets", ())),
        privacy_distance=str(priv.get("distance", "hamming_binned")),
        dcr_distance=str(dcr.get("distance", "enhanced_gower")),
        dcr_eq_class_columns=tuple(dcr.get("eq_class_columns", ())),
        attacker_fractions=tuple(priv.get("attacker_fractions",
                                          (0.1, 0.25, 0.5, 1.0))),
        attr_mode=str(attr.get("mode", "mode_median")),
        attr_match=str(attr.get("match", "exact")),
        attr_tolerance=int(attr.get("tolerance", 1)),
        attr_missing_weight=float(attr.get("missing_weight", 0.5)),
        attr_gvf_threshold=float(attr.get("gvf_threshold", 0.8)),
        attr_k_max=int(attr.get("k_max", 20)),
        membership_r1=_resolve(base, mem.get("r1")),
        membership_r2=_resolve(base, mem.get("r2")),
        membership_s1=_resolve(base, mem.get("s1")),
        membership_s2=_resolve(base, mem.get("s2")),
        membership_trials=int(mem.get("trials", 1)),
        thresholds=Thresholds(
            mi_risk=float(thr.get("mi_risk", defaults.mi_risk)),
            attribute_risk=float(thr.get("attribute_risk",
                                         defaults.attribute_risk)),
            dcr_high_risk=float(thr.get("dcr_high_risk",
                                        defaults.dcr_high_risk)),
            htest_alpha=float(thr.get("htest_alpha", defaults.htest_alpha)),
        ),
    )


@dataclass(frozen=True)
class Verdict:
    metric: str
    value: float | None
    threshold: float | None
    comparison: str                 # "<", "<=", ">=" or "" when skipped
    verdict: str                    # PASS | FAIL | SKIPPED

    def to_dict(self):
        return {"metric": self.metric, "value": self.value,
                "threshold": self.threshold, "comparison": self.comparison,
                "verdict": self.verdict}


def decide(metric: str, value: float, threshold: float, comparison: str) -> Verdict:
    """Pure threshold rule; comparisons are encoded exactly as documented:
    mi_risk strict '<', attribute risk inclusive '<=', dcr strict '<',
    htest 'p >= alpha'."""
    if comparison == "<":
        ok = value < threshold
    elif comparison == "<=":
        ok = value <= threshold
    elif comparison == ">=":
        ok = value >= threshold
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return Verdict(metric=metric, value=float(value), threshold=float(threshold),
                   comparison=comparison, verdict="PASS" if ok else "FAIL")


def skipped(metric: str) -> Verdict:
    return Verdict(metric=metric, value=None, threshold=None, comparison="",
                   verdict="SKIPPED")


@dataclass
class AuditReport:
    metadata: dict
    fidelity: dict
    privacy: dict
    verdicts: list
    warnings: list

    def to_dict(self) -> dict:
        return _plain({
            "report_version": REPORT_VERSION,
            "metadata": self.metadata,
            "fidelity": self.fidelity,
            "privacy": self.privacy,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "warnings": list(self.warnings),
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2,
                          allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditReport":
        verdicts = [
            Verdict(metric=v["metric"], value=v["value"],
                    threshold=v["threshold"], comparison=v["comparison"],
                    verdict=v["verdict"])
            for v in doc.get("verdicts", ())
        ]
        return cls(metadata=doc.get("metadata", {}),
                   fidelity=doc.get("fidelity", {}),
                   privacy=doc.get("privacy", {}),
                   verdicts=verdicts, warnings=list(doc.get("warnings", ())))


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


# ---------------------------------------------------------------------------
# metric blocks
# ---------------------------------------------------------------------------

def _event_flags(dataset: Dataset, column: str):
    spec = dataset.schema.column(column)
    col = dataset.columns[column]
    if spec.kind == "categorical":
        level_map = {}
        for code, lv in enumerate(col.levels):
            if lv not in ("0", "1"):
                raise ConfigInvalid(
                    f"event indicator {column!r} must be 0/1, found {lv!r}")
            level_map[code] = lv == "1"
        flags = np.array([level_map.get(int(c), False) for c in col.codes])
        defined = col.codes >= 0
        return flags, defined
    defined = ~np.isnan(col.values)
    return np.nan_to_num(col.values) != 0, defined


def _block_population(ctx):
    return {"population": population_stats(ctx["real"], ctx["synthetic"])}, [], []


def _block_marginals(ctx):
    cfg = ctx["config"]
    rows = marginal_report(ctx["real"], ctx["synthetic"], n_bins=cfg.bins)
    coverage = support_coverage(
        ctx["real"], ctx["synthetic"], ctx["real"].schema.categorical_names())
    payload = {
        "marginals": [m.to_dict() for m in rows],
        "support_coverage": {
            "value": coverage.value,
            "per_column": coverage.per_column,
            "novel_synthetic_levels": coverage.novel_levels,
        },
    }
    return payload, [], []


def _block_correlation(ctx):
    cfg = ctx["config"]
    columns = list(cfg.correlation_columns) or None
    pair = correlation_pair(ctx["real"], ctx["synthetic"], columns)
    res = pcd(pair)
    payload = {"correlation": {
        "variables": list(pair.variable_names),
        "real": pair.real_matrix,
        "synthetic": pair.syn_matrix,
        "constant_variables": list(pair.constant_variables),
        "pcd_l1": res.pcd_l1, "pcd_l2": res.pcd_l2,
        "pcd_l1_raw": res.pcd_l1_raw, "pcd_l2_raw": res.pcd_l2_raw,
    }}
    return payload, [], []


def _block_discriminator(ctx):
    cfg = ctx["config"]
    if not cfg.discriminator_enabled:
        return {"discriminator": {"status": "skipped"}}, [], []
    res = discriminator_metrics(
        ctx["real"], ctx["synthetic"], family=cfg.discriminator_family,
        folds=cfg.discriminator_folds, repeats=cfg.discriminator_repeats,
        seed=cfg.seed)
    payload = {"discriminator": {
        "auc_mean": res.auc_mean, "auc_sd": res.auc_sd,
        "pmse_mean": res.pmse_mean, "pmse_sd": res.pmse_sd,
        "per_repeat_auc": res.per_repeat_auc,
        "per_repeat_pmse": res.per_repeat_pmse,
        "family": res.family, "folds": res.folds, "repeats": res.repeats,
    }}
    return payload, [], []


def _block_tstr(ctx):
    cfg = ctx["config"]
    if not cfg.tstr_target:
        return {"tstr": {"status": "skipped"}}, [], []
    res = tstr_compare(
        ctx["real"], ctx["synthetic"], target=cfg.tstr_target,
        predictors=list(cfg.tstr_predictors) or None, family=cfg.tstr_family,
        seed=cfg.seed, repeats=cfg.tstr_repeats)
    payload = {"tstr": {
        "target": res.target, "positive_level": res.positive_level,
        "family": res.family,
        "auc_real_mean": res.auc_real_mean, "auc_real_sd": res.auc_real_sd,
        "auc_syn_mean": res.auc_syn_mean, "auc_syn_sd": res.auc_syn_sd,
        "ratio_mean": res.ratio_mean, "ratio_sd": res.ratio_sd,
        "ndcg_mean": res.ndcg_mean, "ndcg_sd": res.ndcg_sd,
        "curves": res.curves, "importances": res.importances,
    }}
    return payload, [], []


def _block_survival(ctx):
    cfg = ctx["config"]
    if not cfg.survival_time or not cfg.survival_group:
        return {"survival": {"status": "skipped"}}, [], []
    time_col = cfg.survival_time
    spec = ctx["real"].schema.column(time_col)
    if spec.kind != "event_time":
        raise ConfigInvalid(f"survival time column {time_col!r} must be event_time")
    indicator = spec.event_indicator_column
    payload = {}
    for label in ("real", "synthetic"):
        ds = ctx[label]
        flags, flag_def = _event_flags(ds, indicator)
        times = ds.columns[time_col].values
        group_col = ds.columns[cfg.survival_group]
        rows = flag_def & ~np.isnan(times) & (group_col.codes >= 0)
        levels = sorted({group_col.levels[c] for c in group_col.codes[rows]})
        if len(levels) != 2:
            raise ConfigInvalid(
                f"survival group {cfg.survival_group!r} must have two levels "
                f"in {label}, found {levels}")
        arms = {}
        groups = []
        for lv in levels:
            sel = rows & (group_col.codes == group_col.levels.index(lv))
            arm_times, arm_events = times[sel], flags[sel]
            curve = kaplan_meier(arm_times, arm_events)
            arms[lv] = curve.step_series()
            groups.append((arm_times, arm_events))
        chi2, p = log_rank(groups[0], groups[1])
        payload[label] = {"curves": arms, "log_rank_chi2": chi2,
                          "log_rank_p": p, "groups": levels}
    return {"survival": payload}, [], []


def _block_rules(ctx):
    cfg = ctx["config"]
    if not cfg.rules_path:
        return {"rules": {"status": "skipped"}}, [], []
    rules = parse_rules_file(cfg.rules_path, ctx["real"].schema)
    payload = {}
    for label in ("real", "synthetic"):
        res = consistency_rate(ctx[label], rules)
        payload[label] = {
            "violation_fraction": res.violation_fraction,
            "per_rule": res.per_rule, "n_rows": res.n_rows,
        }
    payload["rule_names"] = [r.name for r in rules]
    return {"rules": payload}, [], []


def _quasi_and_targets(ctx):
    cfg = ctx["config"]
    schema: Schema = ctx["real"].schema
    quasi = list(cfg.quasi_identifiers) or list(schema.quasi_identifiers())
    targets = list(cfg.sensitive_targets) or list(schema.sensitive_columns())
    return quasi, targets


def _block_attribute(ctx):
    cfg = ctx["config"]
    quasi, targets = _quasi_and_targets(ctx)
    if not quasi or not targets:
        return {"attribute_inference": {"status": "skipped",
                                        "reason": "no quasi-identifiers or "
                                                  "sensitive targets"}}, \
            [skipped("attribute_risk")], []
    suite = attribute_inference_suite(
        ctx["real"], ctx["synthetic"], quasi, targets, mode=cfg.attr_mode,
        match=cfg.attr_match, tolerance=cfg.attr_tolerance,
        missing_weight=cfg.attr_missing_weight,
        gvf_threshold=cfg.attr_gvf_threshold, k_max=cfg.attr_k_max,
        seed=cfg.seed)
    per_target = {
        t: {"risks": r.risks, "lambdas": r.lambdas,
            "match_rate": r.match_rate}
        for t, r in suite.per_target.items()
    }
    payload = {"attribute_inference": {
        "quasi_identifiers": quasi, "targets": targets,
        "per_target": per_target, "totals": suite.totals,
        "mode": cfg.attr_mode, "match": cfg.attr_match,
    }}
    verdicts = [
        decide(f"attribute_risk_{variant}", value,
               cfg.thresholds.attribute_risk, "<=")
        for variant, value in sorted(suite.totals.items())
    ]
    return payload, verdicts, []


def _block_dcr(ctx):
    cfg = ctx["config"]
    res = dcr_summary(
        ctx["real"], ctx["synthetic"],
        quasi_for_eq_class=list(cfg.dcr_eq_class_columns) or None,
        distance=DistanceConfig(mode=cfg.dcr_distance, n_bins=cfg.bins),
        jobs=1)
    payload = {"dcr": {
        "syn_to_real": res.syn_to_real, "real_to_real": res.real_to_real,
        "min_dcr": res.min_dcr, "r0_count": res.r0_count,
        "high_risk_count": res.high_risk_count,
        "high_risk_fraction": res.high_risk_fraction,
        "n_real": res.n_real, "distance": cfg.dcr_distance,
        "eq_class_columns": list(res.eq_class_columns),
    }}
    warn = []
    if res.min_dcr == 0.0 and res.r0_count == res.n_real:
        warn.append("every real record has an exact synthetic twin; the "
                    "synthetic table may be a copy")
    verdicts = [decide("dcr_high_risk", res.high_risk_fraction,
                       cfg.thresholds.dcr_high_risk, "<")]
    return payload, verdicts, warn


def _block_membership(ctx):
    cfg = ctx["config"]
    paths = (cfg.membership_r1, cfg.membership_r2, cfg.membership_s1)
    if not all(paths):
        return {"membership_inference": {
            "status": "skipped",
            "reason": "requires pre-generated r1/r2/s1 files",
        }}, [skipped("mi_risk_score"), skipped("file_membership_p")], []
    schema = ctx["real"].schema
    r1 = load_csv(cfg.membership_r1, schema)
    r2 = load_csv(cfg.membership_r2, schema)
    s1 = load_csv(cfg.membership_s1, schema)
    dist = DistanceConfig(mode=cfg.privacy_distance, n_bins=cfg.bins)
    curves = {}
    summary_curve = None
    for frac in sorted(cfg.attacker_fractions):
        curve = membership_inference(r1, r2, s1, attacker_fraction=frac,
                                     seed=cfg.seed, distance=dist)
        curves[f"{frac:g}"] = {
            "base_threshold": curve.base_threshold,
            "mi_risk_score": curve.mi_risk_score,
            "score_threshold": curve.score_threshold,
            "recall_target_reached": curve.recall_target_reached,
            "n_queries": curve.n_queries,
            "thresholds": [
                {"threshold": row.threshold, "tp": row.tp, "fp": row.fp,
                 "tn": row.tn, "fn": row.fn, "precision": row.precision,
                 "recall": row.recall}
                for row in curve.thresholds
            ],
        }
        summary_curve = curve
    payload = {"membership_inference": {
        "attacker_fractions": sorted(cfg.attacker_fractions),
        "curves": curves,
        "mi_risk_score": summary_curve.mi_risk_score,
        "distance": cfg.privacy_distance,
    }}
    verdicts = [decide("mi_risk_score", max(summary_curve.mi_risk_score, 0.0),
                       cfg.thresholds.mi_risk, "<")]
    warnings = []
    if summary_curve.mi_risk_score < 0:
        warnings.append("raw MI risk score was negative (precision below "
                        "chance); verdict clamps it at 0")

    if cfg.membership_s2:
        s2 = load_csv(cfg.membership_s2, schema)
        fractions, sizes = [], []
        for i in range(cfg.membership_trials):
            frac = file_membership_trial(r1, r2, s1, s2, distance=dist,
                                         seed=cfg.seed + i)
            fractions.append(frac)
            sizes.append(r1.row_count + r2.row_count)
        htest = file_membership_htest(fractions, sizes,
                                      alpha=cfg.thresholds.htest_alpha)
        payload["file_membership"] = {
            "trial_fractions": fractions, "per_trial_n": sizes,
            "p_hat": htest.p_hat, "z": htest.z, "p_value": htest.p_value,
            "verdict": htest.verdict, "n_decisions": htest.n_decisions,
        }
        verdicts.append(decide("file_membership_p", htest.p_value,
                               cfg.thresholds.htest_alpha, ">="))
    else:
        payload["file_membership"] = {"status": "skipped",
                                      "reason": "no s2 file configured"}
        verdicts.append(skipped("file_membership_p"))
    return payload, verdicts, warnings


FIDELITY_BLOCKS = (
    ("population", _block_population),
    ("marginals", _block_marginals),
    ("correlation", _block_correlation),
    ("discriminator", _block_discriminator),
    ("tstr", _block_tstr),
    ("survival", _block_survival),
    ("rules", _block_rules),
)

PRIVACY_BLOCKS = (
    ("attribute", _block_attribute),
    ("dcr", _block_dcr),
    ("membership", _block_membership),
)


def run_audit(config: AuditConfig, only_blocks=None) -> AuditReport:
    """Execute the configured metric blocks and assemble the report.

    Blocks run concurrently up to ``config.jobs`` but merge in a fixed order;
    a failing block is recorded as a block-level error and never aborts the
    others.  ``only_blocks`` restricts execution to the named blocks (used by
    the single-metric CLI subcommands).
    """
    real = load_csv(config.real_path, load_schema(config.schema_path))
    synthetic = load_csv(config.synthetic_path, real.schema)
    ctx = {"real": real, "synthetic": synthetic, "config": config}

    wanted = set(only_blocks) if only_blocks else None
    plan = []
    if config.fidelity_enabled:
        plan.extend(("fidelity", name, fn) for name, fn in FIDELITY_BLOCKS
                    if wanted is None or name in wanted)
    if config.privacy_enabled:
        plan.extend(("privacy", name, fn) for name, fn in PRIVACY_BLOCKS
                    if wanted is None or name in wanted)

    def run_block(entry):
        _section, name, fn = entry
        try:
            return fn(ctx)
        except SynthAuditError as e:
            return ({name: {"status": "error",
                            "error": f"{type(e).__name__}: {e}"}}, [], [])

    if config.jobs > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(run_block, plan))
    else:
        outcomes = [run_block(entry) for entry in plan]

    fidelity, privacy = {}, {}
    verdicts, warnings = [], list(STANDING_WARNINGS)
    for (section, _name, _fn), (payload, block_verdicts, block_warnings) in \
            zip(plan, outcomes):
        (fidelity if section == "fidelity" else privacy).update(payload)
        verdicts.extend(block_verdicts)
        warnings.extend(block_warnings)
    if not config.fidelity_enabled:
        fidelity = {"status": "skipped"}
    if not config.privacy_enabled:
        privacy = {"status": "skipped"}

    metadata = {
        "tool": "synthaudit",
        "tool_version": __version__,
        "seed": config.seed,
        "generated_at": _now_iso() if config.stamp else None,
        "datasets": {
            "real": {"file": Path(config.real_path).name,
                     "rows": real.row_count, "columns": len(real.schema)},
            "synthetic": {"file": Path(config.synthetic_path).name,
                          "rows": synthetic.row_count,
                          "columns": len(synthetic.schema)},
        },
        "thresholds": {
            "mi_risk": config.thresholds.mi_risk,
            "attribute_risk": config.thresholds.attribute_risk,
            "dcr_high_risk": config.thresholds.dcr_high_risk,
            "htest_alpha": config.thresholds.htest_alpha,
        },
    }
    return AuditReport(metadata=metadata, fidelity=fidelity, privacy=privacy,
                       verdicts=verdicts, warnings=warnings)


def _now_iso():
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def render_verdicts(report: AuditReport) -> str:
    """One line per thresholded metric: name, value, rule, outcome."""
    lines = []
    for v in report.verdicts:
        if v.verdict == "SKIPPED":
            lines.append(f"{v.metric}: SKIPPED")
        else:
            lines.append(
                f"{v.metric}: {v.value:.6g} "
                f"({'PASS' if v.verdict == 'PASS' else 'FAIL'}: "
                f"required {v.comparison} {v.threshold:g})"
            )
    counts = {"PASS": 0, "FAIL": 0, "SKIPPED": 0}
    for v in report.verdicts:
        counts[v.verdict] += 1
    lines.append(
        f"summary: {counts['PASS']} pass, {counts['FAIL']} fail, "
        f"{counts['SKIPPED']} skipped")
    return "\n".join(lines)


def exit_status(report: AuditReport) -> int:
    """0 all pass, 1 any fail, 2 when a block errored."""
    for section in (report.fidelity, report.privacy):
        for value in section.values():
            if isinstance(value, dict) and value.get("status") == "error":
                return 2
    if any(v.verdict == "FAIL" for v in report.verdicts):
        return 1
    return 0
