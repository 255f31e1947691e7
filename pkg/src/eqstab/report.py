"""Serialization: JSON reports, round-trip-safe CSV and static SVG line plots.

All writers are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = [
    "SCHEMA_VERSION", "Line", "PlotSeries", "fmt_float", "to_jsonable",
    "dumps_report", "emit_csv", "write_csv", "emit_svg", "render_svg",
]

SCHEMA_VERSION = 1


def fmt_float(v) -> str:
    """Shortest decimal that parses back to the same double."""
    return repr(float(v))


def to_jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and tuples to JSON types.

    Non-finite floats become ``None``; complex values become ``{"re", "im"}``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# CSV

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows) -> None:
    """UTF-8, LF line endings, header row first, floats at full precision."""
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_csv(obj, path) -> None:
    """Write a trajectory, a Greitzer sweep, an eigen field or a plot series as CSV."""
    from .greitzer import SweepRow
    from .sim import Trajectory
    from .stability import EigenField

    if isinstance(obj, Trajectory):
        n = obj.x.shape[1]
        header = ["t"] + [f"x{i}" for i in range(1, n + 1)]
        write_csv(path, header, ([t] + list(x) for t, x in zip(obj.t, obj.x)))
    elif isinstance(obj, EigenField):
        n = len(obj.points[0]) if obj.points else 0
        header = ([f"x{i}" for i in range(1, n + 1)]
                  + [f"eig{k}_{part}" for k in range(1, n + 1) for part in ("re", "im")])
        rows = ([*p] + [v for z in s.values for v in (z.real, z.imag)]
                for p, s in zip(obj.points, obj.spectra))
        write_csv(path, header, rows)
    elif isinstance(obj, PlotSeries):
        header = ["line", obj.x_label, obj.y_label]
        write_csv(path, header, ([ln.label, a, b] for ln in obj.lines for a, b in zip(ln.x, ln.y)))
    elif isinstance(obj, (list, tuple)) and (not obj or isinstance(obj[0], SweepRow)):
        header = ["phi", "psi_c", "g", "real_part", "discriminant", "eig_re", "eig_im"]
        rows = []
        for r in obj:
            upper = max(r.eigenvalues, key=lambda z: z.imag)
            rows.append([r.phi, r.psi_c, r.g, r.real_part, r.discriminant, upper.real, upper.imag])
        write_csv(path, header, rows)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as CSV")


# ---------------------------------------------------------------------------
# SVG

@dataclass(frozen=True)
class Line:
    label: str
    x: tuple
    y: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) != len(y):
            raise ValueError(f"line {self.label!r}: x and y lengths differ")
        if not all(math.isfinite(v) for v in x + y):
            raise ValueError(f"line {self.label!r}: non-finite values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class PlotSeries:
    name: str
    x_label: str
    y_label: str
    lines: tuple

    @classmethod
    def single(cls, name, x_label, y_label, x, y, label=None):
        return cls(name, x_label, y_label, (Line(label or y_label, x, y),))


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _nice_ticks(lo, hi, count=5):
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
    else:
        pad = 0.03 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return lo, hi, ticks


def _tick_label(v):
    s = f"{v:.6g}"
    return "0" if s in ("-0", "0") else s


def render_svg(series: PlotSeries, width: int = 640, height: int = 480, title=None) -> str:
    """Standalone SVG: framed axes with linear scales, one polyline per line, legend."""
    lines = [ln for ln in series.lines if ln.x]
    if not lines:
        raise ValueError("plot series has no points")
    xs = [v for ln in lines for v in ln.x]
    ys = [v for ln in lines for v in ln.y]
    x0, x1, xticks = _nice_ticks(min(xs), max(xs))
    y0, y1, yticks = _nice_ticks(min(ys), max(ys))
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    heading = title if title is not None else series.name
    if heading:
        out.append(f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" '
                   f'font-size="15">{escape(heading)}</text>')
    for v in xticks:
        px = sx(v)
        out.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{top + ph + 18}" text-anchor="middle">{_tick_label(v)}</text>')
    for v in yticks:
        py = sy(v)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end">{_tick_label(v)}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">'
               f'{escape(series.x_label)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(series.y_label)}</text>')
    for i, ln in enumerate(lines):
        color = _PALETTE[i % len(_PALETTE)]
        if len(ln.x) == 1:
            out.append(f'<circle cx="{sx(ln.x[0]):.2f}" cy="{sy(ln.y[0]):.2f}" r="3" fill="{color}"/>')
        else:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(ln.x, ln.y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
    if len(lines) <= 12:
        for i, ln in enumerate(lines):
            ly = top + 16 + 16 * i
            color = _PALETTE[i % len(_PALETTE)]
            out.append(f'<line x1="{left + pw - 120}" y1="{ly - 4}" x2="{left + pw - 100}" '
                       f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw - 95}" y="{ly}">{escape(ln.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(series: PlotSeries, path, width: int = 640, height: int = 480, title=None) -> None:
    text = render_svg(series, width, height, title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
