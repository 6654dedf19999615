"""synthaudit: statistical-fidelity and privacy-risk audits comparing a real
tabular dataset against a synthetic counterpart."""

__version__ = "0.1.0"

from .binning import (BinnedView, bin_views, jenks_breaks, percentile_bin,
                      select_jenks_k)
from .data import Dataset, load_csv, population_stats, write_csv
from .distance import (DistanceConfig, NeighborResult, all_nearest,
                       gower_distance, hamming_distance, nearest_record)
from .models import encode, feature_importance, ndcg, roc_auc, roc_curve, train
from .multivariate import (consistency_rate, correlation_pair,
                           discriminator_metrics, kaplan_meier, log_rank,
                           log_rank_p, pcd, pmse, tstr_compare)
from .privacy import (GridCanarySpace, SubprocessGeneratorAdapter,
                      attribute_inference, attribute_inference_suite,
                      canary_campaign, dcr_summary, exposure,
                      file_membership_htest, file_membership_trial,
                      lambda_prime, membership_inference)
from .report import (AuditConfig, AuditReport, Thresholds, load_config,
                     render_verdicts, run_audit)
from .rules import ClinicalRule, evaluate_rule, parse_rule, parse_rules_file
from .schema import ColumnSpec, Schema, load_schema
from .univariate import (kl_divergence, ks_two_sample, marginal_report,
                         support_coverage, wasserstein_1d)

__all__ = [
    "AuditConfig", "AuditReport", "BinnedView", "ClinicalRule", "ColumnSpec",
    "Dataset", "DistanceConfig", "GridCanarySpace", "NeighborResult",
    "Schema", "SubprocessGeneratorAdapter", "Thresholds", "all_nearest",
    "attribute_inference", "attribute_inference_suite", "bin_views",
    "canary_campaign", "consistency_rate", "correlation_pair",
    "dcr_summary", "discriminator_metrics", "encode", "evaluate_rule",
    "exposure", "feature_importance", "file_membership_htest",
    "file_membership_trial", "gower_distance", "hamming_distance",
    "jenks_breaks", "kaplan_meier", "kl_divergence", "ks_two_sample",
    "lambda_prime", "load_config", "load_csv", "load_schema", "log_rank",
    "log_rank_p", "marginal_report", "membership_inference", "ndcg",
    "nearest_record", "parse_rule", "parse_rules_file", "pcd",
    "percentile_bin", "pmse", "population_stats", "render_verdicts",
    "roc_auc", "roc_curve", "run_audit", "select_jenks_k",
    "support_coverage", "train", "tstr_compare", "wasserstein_1d",
    "write_csv",
]
