"""Command-line interface.

Subcommands: ``audit`` (fidelity + privacy), ``fidelity``, ``privacy``,
``dcr``, ``mi``, ``attr`` (single privacy blocks), ``distance --pair i j``,
``rules check``, ``render`` (SVG charts from a report), and ``eval``
(single-metric JSON bridge for out-of-process bindings).

Exit codes: 0 every verdict passed, 1 at least one failed, 2 error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .data import from_arrays, load_csv
from .distance import DistanceConfig, gower_distance, hamming_distance
from .errors import SynthAuditError
from .privacy import attribute_inference, dcr_summary, exposure
from .report import exit_status, load_config, render_verdicts, run_audit
from .rules import evaluate_rule, parse_rules_file
from .schema import ColumnSpec, Schema, load_schema
from .svgplot import render_report
from .univariate import kl_divergence, ks_two_sample
from . import binning
from . import __version__


def _add_common(parser):
    parser.add_argument("--config", required=True, help="audit config TOML")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--jobs", type=int, help="concurrent metric blocks")
    parser.add_argument("--out", help="report output path")
    parser.add_argument("--stamp", action="store_true",
                        help="embed a wall-clock timestamp (breaks "
                             "byte-for-byte reproducibility)")


def _configure(args, fidelity=None, privacy=None):
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    if args.out is not None:
        config = replace(config, out_path=args.out)
    if args.stamp:
        config = replace(config, stamp=True)
    if fidelity is not None:
        config = replace(config, fidelity_enabled=fidelity)
    if privacy is not None:
        config = replace(config, privacy_enabled=privacy)
    return config


def _emit(report, config) -> int:
    out = config.out_path or "report.json"
    Path(out).write_text(report.to_json(), encoding="utf-8")
    print(render_verdicts(report))
    print(f"report written to {out}")
    return exit_status(report)


def _cmd_audit(args) -> int:
    config = _configure(args)
    return _emit(run_audit(config), config)


def _cmd_fidelity(args) -> int:
    config = _configure(args, privacy=False)
    return _emit(run_audit(config), config)


def _cmd_privacy(args) -> int:
    config = _configure(args, fidelity=False)
    return _emit(run_audit(config), config)


def _single_block(args, block) -> int:
    config = _configure(args, fidelity=False, privacy=True)
    return _emit(run_audit(config, only_blocks=(block,)), config)


def _cmd_distance(args) -> int:
    config = _configure(args)
    schema = load_schema(config.schema_path)
    real = load_csv(config.real_path, schema)
    synthetic = load_csv(config.synthetic_path, schema)
    i, j = args.pair
    views = binning.bin_views([real, synthetic], n_bins=config.bins)
    result = {
        "real_row": i,
        "synthetic_row": j,
        "enhanced_gower": gower_distance(real.record(i), synthetic.record(j)),
        "hamming_binned": hamming_distance((views[0], i), (views[1], j)),
    }
    print(json.dumps(result, sort_keys=True, indent=2))
    return 0


def _cmd_rules_check(args) -> int:
    schema = load_schema(args.schema)
    rules = parse_rules_file(args.rules, schema)
    summary = {"rules": [r.name for r in rules], "ok": True}
    if args.data:
        ds = load_csv(args.data, schema)
        summary["violations"] = {
            r.name: int(evaluate_rule(r, ds).sum()) for r in rules
        }
        summary["rows"] = ds.row_count
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 0


def _cmd_render(args) -> int:
    doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    written = render_report(doc, args.out)
    for path in written:
        print(path)
    return 0


def _inline_schema(columns) -> Schema:
    return Schema(columns=tuple(
        ColumnSpec(name=c["name"], kind=c.get("kind", "numeric"),
                   event_indicator_column=c.get("event_indicator"))
        for c in columns
    ))


def _eval_request(request: dict):
    op = request.get("op")
    args = request.get("args", {})
    if op == "ks_two_sample":
        stat, p = ks_two_sample(args["real"], args["synthetic"])
        return {"statistic": stat, "p_value": p}
    if op == "kl_divergence":
        return {"value": kl_divergence(args["real_counts"],
                                       args["syn_counts"])}
    if op == "exposure":
        return {"value": exposure(int(args["rank"]),
                                  int(args["canary_space_size"]))}
    if op == "gower_distance":
        schema = _inline_schema(args["columns"])
        cells_a, cells_b = args["a"], args["b"]
        columns = {}
        for spec in schema.columns:
            va, vb = cells_a.get(spec.name), cells_b.get(spec.name)
            if spec.is_numeric:
                columns[spec.name] = [
                    float("nan") if va is None else float(va),
                    float("nan") if vb is None else float(vb)]
            else:
                columns[spec.name] = [va, vb]
        ds = from_arrays(schema, columns)
        weights = args.get("weights")
        config = DistanceConfig(mode="enhanced_gower",
                                weights=tuple(weights) if weights else None)
        return {"value": gower_distance(ds.record(0), ds.record(1), config)}
    if op == "dcr_summary":
        schema = load_schema(args["schema"])
        real = load_csv(args["real"], schema)
        synthetic = load_csv(args["synthetic"], schema)
        res = dcr_summary(
            real, synthetic,
            quasi_for_eq_class=args.get("quasi") or None,
            distance=DistanceConfig(mode=args.get("distance", "enhanced_gower"),
                                    n_bins=int(args.get("bins", 10))))
        return {
            "syn_to_real": res.syn_to_real, "real_to_real": res.real_to_real,
            "min_dcr": res.min_dcr, "r0_count": res.r0_count,
            "high_risk_count": res.high_risk_count,
            "high_risk_fraction": res.high_risk_fraction, "n_real": res.n_real,
        }
    if op == "attribute_inference":
        schema = load_schema(args["schema"])
        real = load_csv(args["real"], schema)
        synthetic = load_csv(args["synthetic"], schema)
        res = attribute_inference(
            real, synthetic, args["quasi"], args["target"],
            mode=args.get("mode", "mode_median"),
            match=args.get("match", "exact"),
            tolerance=int(args.get("tolerance", 1)),
            missing_weight=float(args.get("missing_weight", 0.5)))
        return {"risks": res.risks, "lambdas": res.lambdas,
                "match_rate": res.match_rate}
    raise SynthAuditError(f"unknown eval op {op!r}")


def _cmd_eval(args) -> int:
    text = sys.stdin.read() if args.request == "-" \
        else Path(args.request).read_text(encoding="utf-8")
    request = json.loads(text)
    try:
        result = _eval_request(request)
        print(json.dumps({"ok": True, "result": result}, sort_keys=True))
        return 0
    except (SynthAuditError, KeyError, ValueError) as e:
        print(json.dumps({
            "ok": False,
            "error": {"type": type(e).__name__, "message": str(e)},
        }, sort_keys=True))
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthaudit",
        description="fidelity and privacy audits for synthetic tabular data")
    parser.add_argument("--version", action="version",
                        version=f"synthaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in (
        ("audit", _cmd_audit, "run every enabled metric block"),
        ("fidelity", _cmd_fidelity, "statistical-fidelity blocks only"),
        ("privacy", _cmd_privacy, "privacy blocks only"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        p.set_defaults(fn=fn)

    for name, block in (("dcr", "dcr"), ("mi", "membership"),
                        ("attr", "attribute")):
        p = sub.add_parser(name, help=f"run only the {block} block")
        _add_common(p)
        p.set_defaults(fn=lambda a, b=block: _single_block(a, b))

    p = sub.add_parser("distance", help="distance between one real and one "
                                        "synthetic record")
    _add_common(p)
    p.add_argument("--pair", nargs=2, type=int, metavar=("I", "J"),
                   required=True)
    p.set_defaults(fn=_cmd_distance)

    rules = sub.add_parser("rules", help="rule-file utilities")
    rules_sub = rules.add_subparsers(dest="rules_command", required=True)
    check = rules_sub.add_parser("check", help="parse and type-check a rules file")
    check.add_argument("--schema", required=True)
    check.add_argument("--rules", required=True)
    check.add_argument("--data", help="optionally evaluate against a CSV")
    check.set_defaults(fn=_cmd_rules_check)

    render = sub.add_parser("render", help="render SVG charts from a report")
    render.add_argument("--report", required=True)
    render.add_argument("--out", required=True)
    render.set_defaults(fn=_cmd_render)

    ev = sub.add_parser("eval", help="evaluate one metric from a JSON request")
    ev.add_argument("--request", required=True,
                    help="request file path, or '-' for stdin")
    ev.set_defaults(fn=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SynthAuditError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
