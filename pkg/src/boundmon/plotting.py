"""Deterministic CSV-to-SVG rendering of monitoring output.

The CSV schema is shared by the offline and online commands: one row per
``(kind, t_lo, t_hi, dim, lb, ub)`` where kind is ``reach`` (per-step hull of
the propagated estimate), ``sample`` (logged sample hull over its timestamp
interval), ``trigger`` (on-demand sample hull at its step), or ``unsafe``
(region bounds over the whole horizon).  The SVG is written directly with
fixed-precision coordinates so identical inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

__all__ = ["CsvFormatError", "PlotRow", "read_rows", "render_svg"]

CSV_HEADER = ["kind", "t_lo", "t_hi", "dim", "lb", "ub"]
KINDS = ("reach", "sample", "trigger", "unsafe")

# Edges of unsafe regions at or beyond this magnitude are treated as
# "unbounded" clipping artifacts and not drawn.
_WIDE_EDGE = 1e5


class CsvFormatError(ValueError):
    """The CSV input does not follow the monitoring-output schema."""


@dataclass(frozen=True)
class PlotRow:
    kind: str
    t_lo: int
    t_hi: int
    dim: int
    lb: float
    ub: float


def read_rows(path) -> list[PlotRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise CsvFormatError(f"{path}: expected header {CSV_HEADER}, got {header}")
        for lineno, record in enumerate(reader, start=2):
            if len(record) != 6:
                raise CsvFormatError(f"{path}:{lineno}: expected 6 fields")
            kind = record[0]
            if kind not in KINDS:
                raise CsvFormatError(f"{path}:{lineno}: unknown kind {kind!r}")
            try:
                row = PlotRow(
                    kind=kind,
                    t_lo=int(record[1]),
                    t_hi=int(record[2]),
                    dim=int(record[3]),
                    lb=float(record[4]),
                    ub=float(record[5]),
                )
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: {exc}") from exc
            rows.append(row)
    return rows


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """A few round tick positions covering [lo, hi]; deterministic."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(target - 1, 1)
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * power
        if step >= raw:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-12 * max(abs(hi), 1.0):
        ticks.append(0.0 if abs(value) < step * 1e-9 else value)
        value += step
    return ticks


def _tick_label(value: float) -> str:
    return f"{value:g}"


def render_svg(
    rows: list[PlotRow],
    dim: int,
    title: str = "",
    axis_label: str = "",
    width: int = 840,
    height: int = 460,
) -> str:
    """Render one state dimension over time as an SVG document string."""
    reach = [r for r in rows if r.kind == "reach" and r.dim == dim]
    samples = [r for r in rows if r.kind == "sample" and r.dim == dim]
    triggers = [r for r in rows if r.kind == "trigger" and r.dim == dim]
    unsafe = [r for r in rows if r.kind == "unsafe" and r.dim == dim]

    t_values = [r.t_lo for r in rows if r.kind != "unsafe" and r.dim == dim]
    t_values += [r.t_hi for r in rows if r.kind != "unsafe" and r.dim == dim]
    if not t_values:
        t_values = [r.t_lo for r in rows] + [r.t_hi for r in rows] or [0, 1]
    t_min, t_max = min(t_values), max(t_values)
    if t_max == t_min:
        t_max = t_min + 1

    y_values = [v for r in reach + samples + triggers for v in (r.lb, r.ub)]
    if not y_values:
        y_values = [0.0, 1.0]
    y_min, y_max = min(y_values), max(y_values)
    edge_candidates = [
        v for r in unsafe for v in (r.lb, r.ub) if abs(v) < _WIDE_EDGE
    ]
    for edge in edge_candidates:
        span = y_max - y_min or 1.0
        if y_min - 0.75 * span <= edge <= y_max + 0.75 * span:
            y_min = min(y_min, edge)
            y_max = max(y_max, edge)
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.08 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    margin_l, margin_r, margin_t, margin_b = 64, 16, 34, 44
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    def X(t: float) -> float:
        return margin_l + (t - t_min) / (t_max - t_min) * plot_w

    def Y(v: float) -> float:
        return margin_t + (y_max - v) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14" fill="#111111">{escape(title)}</text>'
        )

    # Reachable-set band: one polygon per contiguous run of steps.
    reach_by_step = {}
    for r in reach:
        entry = reach_by_step.get(r.t_lo)
        if entry is None:
            reach_by_step[r.t_lo] = [r.lb, r.ub]
        else:
            entry[0] = min(entry[0], r.lb)
            entry[1] = max(entry[1], r.ub)
    steps = sorted(reach_by_step)
    run: list[int] = []
    runs = []
    for s in steps:
        if run and s != run[-1] + 1:
            runs.append(run)
            run = []
        run.append(s)
    if run:
        runs.append(run)
    for run in runs:
        if len(run) == 1:
            s = run[0]
            lb, ub = reach_by_step[s]
            parts.append(
                f'<line x1="{_fmt(X(s))}" y1="{_fmt(Y(lb))}" x2="{_fmt(X(s))}" '
                f'y2="{_fmt(Y(ub))}" stroke="#4682b4" stroke-width="1.2"/>'
            )
            continue
        forward = " ".join(
            f"{_fmt(X(s))},{_fmt(Y(reach_by_step[s][0]))}" for s in run
        )
        backward = " ".join(
            f"{_fmt(X(s))},{_fmt(Y(reach_by_step[s][1]))}" for s in reversed(run)
        )
        parts.append(
            f'<polygon points="{forward} {backward}" fill="#4682b4" '
            f'fill-opacity="0.45" stroke="#4682b4" stroke-width="0.6"/>'
        )

    # Logged samples: rectangles over their timestamp intervals.
    for r in samples:
        x0 = X(r.t_lo)
        x1 = X(min(r.t_hi, t_max))
        w = max(x1 - x0, 2.0)
        y1 = Y(r.ub)
        h = max(Y(r.lb) - y1, 2.0)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="#1f1f1f" fill-opacity="0.75"/>'
        )

    # On-demand samples: outlined markers.
    for r in triggers:
        x = X(r.t_lo)
        y1 = Y(r.ub)
        h = max(Y(r.lb) - y1, 2.0)
        parts.append(
            f'<rect x="{_fmt(x - 1.5)}" y="{_fmt(y1)}" width="3.00" height="{_fmt(h)}" '
            f'fill="#b45309" fill-opacity="0.9"/>'
        )

    # Unsafe-region edges within view: dashed horizontal lines.
    drawn_edges = set()
    for r in unsafe:
        for edge in (r.lb, r.ub):
            if abs(edge) >= _WIDE_EDGE or not (y_min <= edge <= y_max):
                continue
            key = _fmt(Y(edge))
            if key in drawn_edges:
                continue
            drawn_edges.add(key)
            parts.append(
                f'<line x1="{_fmt(X(t_min))}" y1="{key}" x2="{_fmt(X(t_max))}" '
                f'y2="{key}" stroke="#cc2222" stroke-width="1.4" stroke-dasharray="7,4"/>'
            )

    # Axes and ticks.
    axis_color = "#333333"
    parts.append(
        f'<line x1="{margin_l}" y1="{margin_t + plot_h}" x2="{margin_l + plot_w}" '
        f'y2="{margin_t + plot_h}" stroke="{axis_color}" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" '
        f'y2="{margin_t + plot_h}" stroke="{axis_color}" stroke-width="1"/>'
    )
    for tick in _nice_ticks(t_min, t_max):
        x = X(tick)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{margin_t + plot_h}" x2="{_fmt(x)}" '
            f'y2="{margin_t + plot_h + 5}" stroke="{axis_color}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{margin_t + plot_h + 19}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{_tick_label(tick)}</text>'
        )
    for tick in _nice_ticks(y_min, y_max):
        y = Y(tick)
        parts.append(
            f'<line x1="{margin_l - 5}" y1="{_fmt(y)}" x2="{margin_l}" '
            f'y2="{_fmt(y)}" stroke="{axis_color}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{margin_l - 8}" y="{_fmt(y + 3.5)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{_tick_label(tick)}</text>'
        )
    parts.append(
        f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" fill="#333333">time step</text>'
    )
    if axis_label:
        parts.append(
            f'<text x="16" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" fill="#333333" '
            f'transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})">{escape(axis_label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
