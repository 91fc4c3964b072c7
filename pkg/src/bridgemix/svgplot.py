"""Static SVG plots of experiment summaries (no plotting dependency).

Three figures mirror the experiment report: per-q strip plots of the chain
summaries, kernel density curves of the log posterior summary at one
exponent, and divergence counts.  Plots are diagnostic, not pixel-specified.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

__all__ = ["plot_summary"]

COLORS = {"naive": "#d62728", "centered": "#1f77b4", "noncentered": "#2ca02c"}

_W, _H = 360, 300
_ML, _MR, _MT, _MB = 52, 12, 28, 42


class _Panel:
    """One axes rectangle with data-to-pixel mapping and tick drawing."""

    def __init__(self, x0, xlim, ylim, title, xlabel, ylabel, log_y=False):
        self.ox = x0
        self.log_y = log_y
        self.xlim = xlim
        self.ylim = ylim
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.parts: list[str] = []

    def px(self, x):
        lo, hi = self.xlim
        return self.ox + _ML + (x - lo) / (hi - lo) * (_W - _ML - _MR)

    def py(self, y):
        lo, hi = self.ylim
        if self.log_y:
            y = math.log10(max(y, lo))
            lo, hi = math.log10(lo), math.log10(hi)
        frac = (y - lo) / (hi - lo) if hi > lo else 0.5
        return _MT + (_H - _MT - _MB) * (1.0 - frac)

    def frame(self):
        x0, x1 = self.ox + _ML, self.ox + _W - _MR
        y0, y1 = _MT, _H - _MB
        self.parts.append(
            f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        self.parts.append(
            f'<text x="{(x0 + x1) / 2:.1f}" y="{_MT - 10}" text-anchor="middle" '
            f'font-size="12" font-weight="bold">{self.title}</text>'
        )
        self.parts.append(
            f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 8}" text-anchor="middle" '
            f'font-size="11">{self.xlabel}</text>'
        )
        self.parts.append(
            f'<text x="{self.ox + 14}" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
            f'font-size="11" transform="rotate(-90 {self.ox + 14} {(y0 + y1) / 2:.1f})">'
            f"{self.ylabel}</text>"
        )

    def xticks(self, values, labels=None):
        labels = labels or [_fmt(v) for v in values]
        for v, lab in zip(values, labels):
            x = self.px(v)
            self.parts.append(
                f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" '
                f'y2="{_H - _MB + 4}" stroke="#333"/>'
            )
            self.parts.append(
                f'<text x="{x:.1f}" y="{_H - _MB + 15}" text-anchor="middle" '
                f'font-size="9">{lab}</text>'
            )

    def yticks(self, values, labels=None):
        labels = labels or [_fmt(v) for v in values]
        for v, lab in zip(values, labels):
            y = self.py(v)
            self.parts.append(
                f'<line x1="{self.ox + _ML - 4}" y1="{y:.1f}" '
                f'x2="{self.ox + _ML}" y2="{y:.1f}" stroke="#333"/>'
            )
            self.parts.append(
                f'<text x="{self.ox + _ML - 6}" y="{y + 3:.1f}" text-anchor="end" '
                f'font-size="9">{lab}</text>'
            )

    def point(self, x, y, color, r=2.2, opacity=0.75):
        self.parts.append(
            f'<circle cx="{self.px(x):.1f}" cy="{self.py(y):.1f}" r="{r}" '
            f'fill="{color}" fill-opacity="{opacity}"/>'
        )

    def polyline(self, xs, ys, color, width=1.2, opacity=0.8):
        pts = " ".join(
            f"{self.px(x):.1f},{self.py(y):.1f}" for x, y in zip(xs, ys)
        )
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}" stroke-opacity="{opacity}"/>'
        )


def _fmt(v) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.0e}"
    return f"{v:g}"


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * span:
        out.append(round(v, 12))
        v += step
    return out


def _jitter(key: str) -> float:
    # deterministic pseudo-jitter in (-1, 1)
    h = 2166136261
    for ch in key:
        h = ((h ^ ord(ch)) * 16777619) & 0xFFFFFFFF
    return (h / 0xFFFFFFFF) * 2.0 - 1.0


def _svg_document(panels, legend_entries, width):
    body = []
    for p in panels:
        body.extend(p.parts)
    lx = width - 130
    for i, (label, color) in enumerate(legend_entries):
        y = _MT + 2 + 14 * i
        body.append(f'<circle cx="{lx}" cy="{y}" r="3.5" fill="{color}"/>')
        body.append(
            f'<text x="{lx + 8}" y="{y + 3}" font-size="10">{label}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{_H}" viewBox="0 0 {width} {_H}">\n'
        '<rect width="100%" height="100%" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def plot_summary(summary_csv, kde_csv=None, out_dir=None, plot_q=0.2):
    """Render the three report figures from the summary (and KDE) CSVs.

    Returns the list of written SVG paths.  Requires a non-empty summary.
    """
    summary_csv = Path(summary_csv)
    out_dir = Path(out_dir) if out_dir is not None else summary_csv.parent
    rows = _read_rows(summary_csv)
    rows = [r for r in rows if r["mean_log_summary"] not in ("", "nan")]
    if not rows:
        raise ValueError("empty summary input")
    params = sorted({r["parametrization"] for r in rows},
                    key=list(COLORS).index)
    qs = sorted({float(r["q"]) for r in rows})
    legend = [(p, COLORS[p]) for p in params]
    qlim = (min(qs) - 0.12, max(qs) + 0.12)
    written = []

    # figure 1: per-chain mean log summary, min ESS (log scale), wall time
    metrics = [
        ("mean_log_summary", "mean log summary", False),
        ("min_ess", "min ESS (log)", True),
        ("wall_time_s", "wall time (s)", False),
    ]
    panels = []
    for i, (col, label, logy) in enumerate(metrics):
        vals = [float(r[col]) for r in rows]
        if logy:
            lo = max(min(vals), 1e-2)
            ylim = (10 ** math.floor(math.log10(lo)),
                    10 ** math.ceil(math.log10(max(vals) + 1)))
        else:
            lo, hi = min(vals), max(vals)
            pad = 0.05 * (hi - lo or 1.0)
            ylim = (lo - pad, hi + pad)
        panel = _Panel(i * _W, qlim, ylim, label, "q", label, log_y=logy)
        panel.frame()
        panel.xticks(qs)
        if logy:
            ticks, t = [], ylim[0]
            while t <= ylim[1]:
                ticks.append(t)
                t *= 10
            panel.yticks(ticks)
        else:
            panel.yticks(_nice_ticks(*ylim))
        for r in rows:
            q = float(r["q"])
            off = 0.035 * _jitter(f'{r["q"]}|{r["parametrization"]}|{r["chain"]}|{col}')
            panel.point(q + off, float(r[col]), COLORS[r["parametrization"]])
        panels.append(panel)
    doc = _svg_document(panels, legend, 3 * _W)
    p1 = out_dir / "fig1_summary.svg"
    p1.write_text(doc, encoding="utf-8")
    written.append(p1)

    # figure 2: KDE curves of the log summary at one exponent
    if kde_csv is not None and Path(kde_csv).exists():
        krows = [
            r for r in _read_rows(kde_csv)
            if abs(float(r["q"]) - plot_q) < 1e-9
        ]
        if krows:
            xs = [float(r["grid_point"]) for r in krows]
            ys = [float(r["density"]) for r in krows]
            panel = _Panel(
                0,
                (min(xs), max(xs)),
                (0.0, max(ys) * 1.05),
                f"log summary density, q={plot_q:g}",
                "log unnormalized posterior summary",
                "density",
            )
            panel.frame()
            panel.xticks(_nice_ticks(min(xs), max(xs)))
            panel.yticks(_nice_ticks(0.0, max(ys) * 1.05))
            series: dict[tuple[str, str], list[tuple[float, float]]] = {}
            for r in krows:
                series.setdefault(
                    (r["parametrization"], r["chain"]), []
                ).append((float(r["grid_point"]), float(r["density"])))
            for (par, _chain), pts in sorted(series.items()):
                panel.polyline(
                    [p[0] for p in pts], [p[1] for p in pts], COLORS[par],
                    width=0.9, opacity=0.6,
                )
            doc = _svg_document([panel], legend, _W)
            p2 = out_dir / "fig2_kde.svg"
            p2.write_text(doc, encoding="utf-8")
            written.append(p2)

    # figure 3: divergent transitions per chain
    vals = [float(r["divergences"]) for r in rows]
    ylim = (-0.5, max(vals) * 1.05 + 1)
    panel = _Panel(0, qlim, ylim, "divergent transitions per chain", "q",
                   "divergences")
    panel.frame()
    panel.xticks(qs)
    panel.yticks(_nice_ticks(0, ylim[1]))
    for r in rows:
        q = float(r["q"])
        off = 0.035 * _jitter(f'{r["q"]}|{r["parametrization"]}|{r["chain"]}|div')
        panel.point(q + off, float(r["divergences"]),
                    COLORS[r["parametrization"]])
    doc = _svg_document([panel], legend, _W)
    p3 = out_dir / "fig3_divergences.svg"
    p3.write_text(doc, encoding="utf-8")
    written.append(p3)
    return written
