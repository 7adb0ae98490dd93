"""Trait-index tables and radar-chart SVG figures."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .ranking import TraitIndexVector

SVG_SIZE = 420
CENTER = SVG_SIZE / 2
RADIUS = 150.0
SERIES_COLORS = ("#1b6ca8", "#d1495b", "#2e933c", "#8d5a97", "#e3b505", "#4f6d7a")
MIN_AXES = 3


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class RadarSeries:
    """One polygon of a radar chart: a value in [0, 100] per axis, None when
    the underlying ranking was unavailable (drawn at 0 with a marker)."""

    name: str
    values: tuple[float | None, ...]

    def __post_init__(self):
        for v in self.values:
            if v is not None and not 0 <= v <= 100:
                raise ReportError(f"radar value {v} outside [0, 100]")


def emit_trait_tables(vectors: list[TraitIndexVector], path: str | Path) -> None:
    """One CSV row per trait-index vector; unavailable rows keep empty cells."""
    if not vectors:
        raise ReportError("no trait-index vectors to write")
    order = {"top": 0, "lowest": 1}
    rows = sorted(vectors, key=lambda v: (v.detector, v.kind, v.step,
                                          order.get(v.polarity, 2)))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "kind", "step", "amount", "polarity", "j",
                         "F_pct", "G_pct", "H_pct", "available", "scenes"])
        for v in rows:
            if v.available:
                # One decimal is lossless for multiples of 1/j at default j.
                f, g, h = (f"{x * 100:.1f}" for x in (v.F, v.G, v.H))
            else:
                f = g = h = ""
            amount = "" if v.amount is None else f"{v.amount:g}"
            writer.writerow([v.detector, v.kind, v.step, amount, v.polarity,
                             v.j, f, g, h, str(v.available).lower(),
                             " ".join(str(s) for s in v.scenes)])


def _vertex(axis_index: int, num_axes: int, value: float) -> tuple[float, float]:
    # Axes clockwise starting at 12 o'clock; SVG y grows downward.
    theta = -math.pi / 2 + 2 * math.pi * axis_index / num_axes
    r = (value / 100.0) * RADIUS
    return (CENTER + r * math.cos(theta), CENTER + r * math.sin(theta))


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_radar_svg(axis_labels: list[str], series: list[RadarSeries]) -> str:
    """Build the SVG text for a radar chart; deterministic for fixed input."""
    if not 1 <= len(series) <= 6:
        raise ReportError(f"need 1..6 series, got {len(series)}")
    n = len(axis_labels)
    if n < MIN_AXES:
        raise ReportError(f"need >= {MIN_AXES} axes, got {n}")
    for s in series:
        if len(s.values) != n:
            raise ReportError(
                f"series {s.name!r} has {len(s.values)} values for {n} axes"
            )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" '
        f'height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
    ]

    # Grid rings every 25%.
    for pct in (25, 50, 75, 100):
        r = _fmt(pct / 100.0 * RADIUS)
        parts.append(f'<circle cx="{_fmt(CENTER)}" cy="{_fmt(CENTER)}" r="{r}" '
                     'fill="none" stroke="#cccccc" stroke-width="1"/>')

    # Spokes and axis labels on the perimeter.
    for i, label in enumerate(axis_labels):
        x, y = _vertex(i, n, 100.0)
        parts.append(f'<line x1="{_fmt(CENTER)}" y1="{_fmt(CENTER)}" '
                     f'x2="{_fmt(x)}" y2="{_fmt(y)}" stroke="#cccccc" stroke-width="1"/>')
        lx, ly = _vertex(i, n, 112.0)
        parts.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="10" '
                     f'text-anchor="middle" dominant-baseline="middle">{label}</text>')

    for si, s in enumerate(series):
        color = SERIES_COLORS[si % len(SERIES_COLORS)]
        points = []
        markers = []
        for i, v in enumerate(s.values):
            x, y = _vertex(i, n, 0.0 if v is None else v)
            points.append(f"{_fmt(x)},{_fmt(y)}")
            if v is None:
                markers.append(
                    f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="none" '
                    f'stroke="{color}" stroke-width="1.5" stroke-dasharray="2,1.5"/>'
                )
        parts.append(f'<polygon points="{" ".join(points)}" fill="{color}" '
                     f'fill-opacity="0.12" stroke="{color}" stroke-width="1.6"/>')
        parts.extend(markers)
        # Legend swatch + label.
        ly = 16 + 14 * si
        parts.append(f'<rect x="8" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="22" y="{ly}" font-size="11">{s.name}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_radar_svg(axis_labels: list[str], series: list[RadarSeries],
                   path: str | Path) -> None:
    Path(path).write_text(render_radar_svg(axis_labels, series))


def radar_series_for(vectors: list[TraitIndexVector], detector: str, kind: str,
                     polarity: str) -> tuple[list[str], list[RadarSeries]]:
    """Assemble the F/G/H series over transformation steps for one chart."""
    selected = sorted(
        (v for v in vectors
         if v.detector == detector and v.kind == kind and v.polarity == polarity),
        key=lambda v: v.step,
    )
    if not selected:
        raise ReportError(f"no vectors for {detector}/{kind}/{polarity}")
    labels = [f"{v.amount:g}" if v.amount is not None else str(v.step)
              for v in selected]
    series = []
    for name, attr in (("F", "F"), ("G", "G"), ("H", "H")):
        values = tuple(
            getattr(v, attr) * 100.0 if v.available else None for v in selected
        )
        series.append(RadarSeries(name=f"{name} {polarity}", values=values))
    return labels, series


def emit_report(vectors: list[TraitIndexVector], out_dir: str | Path) -> list[Path]:
    """Summary table plus one radar SVG per (detector, kind, polarity)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    table = out_dir / "trait_indices.csv"
    emit_trait_tables(vectors, table)
    written.append(table)

    charts = sorted({(v.detector, v.kind, v.polarity) for v in vectors})
    for detector, kind, polarity in charts:
        labels, series = radar_series_for(vectors, detector, kind, polarity)
        path = out_dir / f"{detector}_{kind}_{polarity}.svg"
        emit_radar_svg(labels, series, path)
        written.append(path)
    return written
