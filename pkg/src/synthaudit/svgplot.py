"""Minimal deterministic SVG charts rendered from report data series.

No plotting library: fixed canvas, fixed float formatting, stable iteration
order, so output files are byte-identical for identical reports.
"""
from __future__ import annotations

import re
from pathlib import Path

W, H = 480, 300
MARGIN = 42
PALETTE = {"real": "#3563a8", "synthetic": "#4caf6e"}


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Svg:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.0f}" y="16" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{title}</text>',
        ]

    def rect(self, x, y, w, h, color, opacity=1.0):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(h)}" fill="{color}" fill-opacity="{opacity:g}"/>')

    def polyline(self, points, color, dashed=False):
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        dash = ' stroke-dasharray="4 3"' if dashed else ""
        self.parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash}/>')

    def text(self, x, y, s, size=10, color="#333333"):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" fill="{color}">{s}</text>')

    def axes(self):
        self.parts.append(
            f'<path d="M {MARGIN} {MARGIN} V {H - MARGIN} H {W - MARGIN}" '
            f'fill="none" stroke="#555555" stroke-width="1"/>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _scale(lo, hi, out_lo, out_hi):
    span = (hi - lo) or 1.0

    def f(v):
        return out_lo + (v - lo) / span * (out_hi - out_lo)
    return f


def _paired_bars(title, labels, real_counts, syn_counts):
    svg = _Svg(title)
    svg.axes()
    n = max(len(labels), 1)
    top = max([*real_counts, *syn_counts, 1])
    sy = _scale(0, top, H - MARGIN, MARGIN)
    slot = (W - 2 * MARGIN) / n
    bar = slot * 0.38
    for i, _label in enumerate(labels):
        x0 = MARGIN + i * slot + slot * 0.08
        svg.rect(x0, sy(real_counts[i]), bar,
                 (H - MARGIN) - sy(real_counts[i]), PALETTE["real"])
        svg.rect(x0 + bar + slot * 0.04, sy(syn_counts[i]), bar,
                 (H - MARGIN) - sy(syn_counts[i]), PALETTE["synthetic"])
    svg.text(MARGIN, H - 10, " | ".join(str(lv) for lv in labels)[:90], size=8)
    svg.text(W - MARGIN - 120, MARGIN - 6, "real", color=PALETTE["real"])
    svg.text(W - MARGIN - 70, MARGIN - 6, "synthetic",
             color=PALETTE["synthetic"])
    return svg.render()


def _histogram_labels(hist):
    """Bin labels for either histogram shape.

    Marginal histograms carry interior edges (counts = len(edges) + 1);
    distance histograms carry either integer bins or full boundary edges
    (counts = len(edges) - 1).
    """
    if "levels" in hist:
        return [str(lv) for lv in hist["levels"]]
    if "bins" in hist:
        return [str(b) for b in hist["bins"]]
    edges = hist.get("edges", [])
    n_counts = len(hist.get("real", hist.get("counts", [])))
    if len(edges) == n_counts + 1:
        bounds = [f"{e:.3g}" for e in edges]
    else:
        bounds = ["-inf"] + [f"{e:.3g}" for e in edges] + ["inf"]
    return [f"[{a},{b})" for a, b in zip(bounds[:-1], bounds[1:])]


def _lines_chart(title, series, x_label, y_label, y_lo=0.0, y_hi=1.0):
    svg = _Svg(title)
    svg.axes()
    xs = [x for s in series.values() for x in s["x"]]
    if not xs:
        return svg.render()
    sx = _scale(min(xs), max(xs), MARGIN, W - MARGIN)
    sy = _scale(y_lo, y_hi, H - MARGIN, MARGIN)
    for i, (name, s) in enumerate(sorted(series.items())):
        color = PALETTE.get(name, "#aa4444")
        pts = [(sx(x), sy(y)) for x, y in zip(s["x"], s["y"])]
        svg.polyline(pts, color, dashed=bool(i % 2) and name not in PALETTE)
        svg.text(W - MARGIN - 150, MARGIN + 12 * (i + 1), name, color=color)
    svg.text(W / 2, H - 6, x_label, size=9)
    svg.text(6, MARGIN - 6, y_label, size=9)
    return svg.render()


def _heatmap(title, names, matrix):
    svg = _Svg(title)
    n = len(names)
    if n == 0:
        return svg.render()
    cell = min((W - 2 * MARGIN) / n, (H - 2 * MARGIN) / n)
    for i in range(n):
        for j in range(n):
            v = matrix[i][j]
            # blue (-1) .. white (0) .. red (+1)
            if v >= 0:
                color = f"rgb(255,{int(255 * (1 - v))},{int(255 * (1 - v))})"
            else:
                color = f"rgb({int(255 * (1 + v))},{int(255 * (1 + v))},255)"
            svg.rect(MARGIN + j * cell, MARGIN + i * cell, cell, cell, color)
    return svg.render()


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def render_report(report_dict: dict, outdir) -> list:
    """Write SVG charts for the plottable series of a report; returns paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, content):
        path = outdir / name
        path.write_text(content, encoding="utf-8")
        written.append(str(path))

    fidelity = report_dict.get("fidelity", {})
    for row in fidelity.get("marginals", []):
        hist = row.get("histogram")
        if not hist or row["metric"] not in ("ks", "kl"):
            continue
        put(f"marginal_{_slug(row['column'])}.svg",
            _paired_bars(f"{row['column']} ({row['metric']})",
                         _histogram_labels(hist), hist["real"],
                         hist["synthetic"]))

    corr = fidelity.get("correlation")
    if corr and "real" in corr:
        put("correlation_real.svg",
            _heatmap("correlation (real)", corr["variables"], corr["real"]))
        put("correlation_synthetic.svg",
            _heatmap("correlation (synthetic)", corr["variables"],
                     corr["synthetic"]))

    tstr = fidelity.get("tstr")
    if tstr and "curves" in tstr:
        series = {
            name: {"x": curve["fpr"], "y": curve["tpr"]}
            for name, curve in tstr["curves"].items()
        }
        put("roc_tstr.svg",
            _lines_chart("model ROC: real vs synthetic training", series,
                         "false positive rate", "true positive rate"))

    survival = fidelity.get("survival")
    if survival and "real" in survival:
        series = {}
        for label in ("real", "synthetic"):
            for group, curve in survival[label]["curves"].items():
                series[f"{label}:{group}"] = {
                    "x": curve["time"], "y": curve["survival"]}
        put("km.svg",
            _lines_chart("Kaplan-Meier survival", series, "time",
                         "survival probability"))

    privacy = report_dict.get("privacy", {})
    dcr = privacy.get("dcr")
    if dcr and "syn_to_real" in dcr:
        hist = dcr["syn_to_real"]
        base = dcr["real_to_real"]
        put("dcr.svg",
            _paired_bars("distance to closest record (blue: real-to-real "
                         "baseline as 'real')", _histogram_labels(hist),
                         base["counts"], hist["counts"]))

    mi = privacy.get("membership_inference")
    if mi and "curves" in mi:
        fractions = sorted(mi["curves"])
        last = mi["curves"][fractions[-1]]
        xs = [row["threshold"] for row in last["thresholds"]]
        series = {
            "precision": {"x": xs,
                          "y": [row["precision"] for row in last["thresholds"]]},
            "recall": {"x": xs,
                       "y": [row["recall"] for row in last["thresholds"]]},
        }
        put("membership.svg",
            _lines_chart("membership inference", series,
                         "distance threshold", "rate"))
    return written
