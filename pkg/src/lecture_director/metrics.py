"""Statistics of an edited sequence and side-by-side comparison tables."""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import EditConfig, EditDecisionList, EditError
from .scoring import ScoreMatrix, TransitionMatrix
from .solver import State, rescore

METRIC_NAMES = ("R_avg", "r_max", "r_trans", "n_sw", "L_avg")
HIGHLIGHTED = ("R_avg", "r_max", "r_trans")


@dataclass(frozen=True)
class MetricsReport:
    R_avg: float
    r_max: float
    r_trans: float
    n_sw: int
    L_avg: Fraction  # exact, so that L_avg * (n_sw + 1) == T holds
    T: int

    def as_dict(self) -> dict[str, float]:
        return {m: float(getattr(self, m)) for m in METRIC_NAMES} | {"T": self.T}


def compute_metrics(
    edl: EditDecisionList,
    scores: ScoreMatrix,
    t_mat: TransitionMatrix,
    cfg: EditConfig,
    init: State | None = None,
) -> MetricsReport:
    """Per-instance reward, best-view rate, favorable-cut rate, cut count, mean shot length.

    With no cuts, ``r_trans`` is 1.0.
    """
    T = scores.T
    edl.check(T, scores.camera_ids)
    index = {cam: i for i, cam in enumerate(scores.camera_ids)}
    seq = [index[c] for c in edl.to_sequence()]
    if len(seq) != T:
        raise EditError(f"EDL covers {len(seq)} instances, scores have {T}")
    total = rescore(seq, scores, cfg, init)
    r_max = float(np.mean(scores.argmax_cameras() == np.asarray(seq)))
    cuts = [(a, b) for a, b in zip(seq[:-1], seq[1:]) if a != b]
    if cuts:
        good = sum(t_mat.is_favorable(scores.kinds[a], scores.kinds[b]) for a, b in cuts)
        r_trans = good / len(cuts)
    else:
        r_trans = 1.0
    n_sw = len(edl.segments) - 1
    return MetricsReport(total / T, r_max, r_trans, n_sw, Fraction(T, n_sw + 1), T)


def mean_report(reports: Sequence[MetricsReport]) -> dict[str, float]:
    """Column means across scenarios (``n_sw`` becomes the mean cut count)."""
    if not reports:
        raise EditError("no reports to average")
    return {name: float(np.mean([float(getattr(r, name)) for r in reports])) for name in METRIC_NAMES}


@dataclass(frozen=True)
class Comparison:
    rows: tuple[tuple[str, dict[str, float]], ...]
    best: dict[str, tuple[str, ...]]

    def is_best(self, method: str, metric: str) -> bool:
        return method in self.best.get(metric, ())

    def to_text(self) -> str:
        header = ["Method", *METRIC_NAMES]
        body = []
        for name, vals in self.rows:
            cells = [name]
            for m in METRIC_NAMES:
                v = vals.get(m)
                if v is None:
                    cells.append("failed")
                    continue
                txt = _fmt_metric(m, v)
                cells.append(txt + ("*" if self.is_best(name, m) else " "))
            body.append(cells)
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
                 for r in [header, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append("* best in column")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", *METRIC_NAMES, "best"])
        for name, vals in self.rows:
            cells = [name] + ["" if vals.get(m) is None else repr(round(float(vals[m]), 6) + 0.0) for m in METRIC_NAMES]
            cells.append(";".join(m for m in HIGHLIGHTED if self.is_best(name, m)))
            w.writerow(cells)
        return buf.getvalue()


def _fmt_metric(name: str, v: float) -> str:
    if name in ("r_max", "r_trans"):
        return f"{100 * v:.1f}%"
    if name == "n_sw":
        return f"{v:.1f}" if v != int(v) else str(int(v))
    return f"{v:.4f}"


def compare(rows: Sequence[tuple[str, MetricsReport | dict[str, float] | None]]) -> Comparison:
    """Tabulate reports and mark the best ``R_avg``, ``r_max`` and ``r_trans`` (ties all marked)."""
    if not rows:
        raise EditError("compare needs at least one row")
    norm = []
    for name, rep in rows:
        if rep is None:
            norm.append((name, {}))
        elif isinstance(rep, MetricsReport):
            norm.append((name, {m: float(getattr(rep, m)) for m in METRIC_NAMES}))
        else:
            norm.append((name, {m: float(rep[m]) for m in METRIC_NAMES}))
    best = {}
    for m in HIGHLIGHTED:
        vals = [v[m] for _, v in norm if m in v]
        if vals:
            top = max(vals)
            best[m] = tuple(n for n, v in norm if m in v and v[m] >= top - 1e-12)
    return Comparison(tuple(norm), best)


_SVG_COLORS = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f")


def timeline_svg(edl: EditDecisionList, camera_ids: Sequence[str], width: int = 900, row_height: int = 22) -> str:
    """Selection timeline: time on the horizontal axis, one row per camera."""
    T = edl.T
    edl.check(T, camera_ids)
    left, top, right, bottom = 60, 10, 10, 30
    plot_w = width - left - right
    height = top + bottom + row_height * len(camera_ids)
    row = {c: i for i, c in enumerate(camera_ids)}

    def x(t: int) -> str:
        return f"{left + plot_w * t / T:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for cam, i in row.items():
        y = top + i * row_height
        out.append(f'<line x1="{left}" y1="{y + row_height / 2}" x2="{width - right}" y2="{y + row_height / 2}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + row_height / 2 + 4}" text-anchor="end">{_xml(cam)}</text>')
    for seg in edl.segments:
        i = row[seg.camera]
        y = top + i * row_height + 3
        w = plot_w * seg.length / T
        out.append(f'<rect x="{x(seg.start)}" y="{y}" width="{w:.3f}" height="{row_height - 6}" '
                   f'fill="{_SVG_COLORS[i % len(_SVG_COLORS)]}"><title>{_xml(seg.camera)} '
                   f'[{seg.start}, {seg.end})</title></rect>')
    axis_y = top + row_height * len(camera_ids)
    out.append(f'<line x1="{left}" y1="{axis_y}" x2="{width - right}" y2="{axis_y}" stroke="black"/>')
    for k in range(6):
        t = round(T * k / 5)
        out.append(f'<text x="{x(t)}" y="{axis_y + 14}" text-anchor="middle">{t}</text>')
    out.append(f'<text x="{left + plot_w / 2:.3f}" y="{axis_y + 27}" text-anchor="middle">instance</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
