import csv
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from scenebias.core import RepeatabilityRecord, SceneLabels
from scenebias.ranking import TraitIndexVector, trait_index_table
from scenebias.report import (
    CENTER,
    RADIUS,
    RadarSeries,
    ReportError,
    emit_radar_svg,
    emit_report,
    emit_trait_tables,
    render_radar_svg,
)


def vec(detector="d", kind="gaussian-blur", step=2, polarity="top", j=4,
        F=0.25, G=0.5, H=0.75, available=True, amount=None, scenes=(1, 2, 3, 4)):
    if not available:
        F = G = H = None
        scenes = ()
    return TraitIndexVector(detector=detector, kind=kind, step=step,
                            polarity=polarity, j=j, F=F, G=G, H=H,
                            available=available, amount=amount, scenes=scenes)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def polygon_points(svg_text):
    root = ET.fromstring(svg_text)
    ns = "{http://www.w3.org/2000/svg}"
    out = []
    for poly in root.iter(f"{ns}polygon"):
        pts = [tuple(float(c) for c in p.split(","))
               for p in poly.attrib["points"].split()]
        out.append(pts)
    return out


class TestTraitTables:
    def test_single_vector(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_trait_tables([vec()], path)
        rows = read_rows(path)
        assert len(rows) == 1
        assert rows[0]["F_pct"] == "25.0"
        assert rows[0]["available"] == "true"

    def test_row_count_matches_vectors(self, tmp_path):
        vectors = [vec(detector=d, kind=k, step=s, polarity=p)
                   for d in ("a", "b") for k in ("gaussian-blur", "jpeg-compression")
                   for s in (2, 3) for p in ("top", "lowest")]
        path = tmp_path / "t.csv"
        emit_trait_tables(vectors, path)
        assert len(read_rows(path)) == len(vectors)

    def test_unavailable_row_empty_cells(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_trait_tables([vec(available=False)], path)
        row = read_rows(path)[0]
        assert row["available"] == "false"
        assert row["F_pct"] == row["G_pct"] == row["H_pct"] == ""

    def test_deterministic_order(self, tmp_path):
        vectors = [vec(step=3), vec(step=2, polarity="lowest"), vec(step=2)]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_trait_tables(vectors, a)
        emit_trait_tables(list(reversed(vectors)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ReportError):
            emit_trait_tables([], tmp_path / "t.csv")


class TestRadarSvg:
    AXES = ["0.5", "1.0", "1.5", "2.0"]

    def test_full_scale_vertices_on_perimeter(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (100, 100, 100, 100))])
        series_poly = polygon_points(svg)[0]
        for x, y in series_poly:
            r = math.hypot(x - CENTER, y - CENTER)
            assert abs(r - RADIUS) <= 0.5

    def test_zero_collapses_to_center(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (0, 0, 0, 0))])
        for x, y in polygon_points(svg)[0]:
            assert math.hypot(x - CENTER, y - CENTER) <= 0.5

    def test_vertex_radius_proportional(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (25, 50, 75, 100))])
        pts = polygon_points(svg)[0]
        for value, (x, y) in zip((25, 50, 75, 100), pts):
            assert math.hypot(x - CENTER, y - CENTER) == pytest.approx(
                value / 100 * RADIUS, abs=0.5)

    def test_axes_clockwise_from_noon(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (100, 100, 100, 100))])
        pts = polygon_points(svg)[0]
        # First axis at 12 o'clock, second a quarter-turn clockwise (east).
        assert pts[0][0] == pytest.approx(CENTER, abs=0.01)
        assert pts[0][1] < CENTER
        assert pts[1][0] > CENTER
        assert pts[1][1] == pytest.approx(CENTER, abs=0.01)

    def test_wellformed_xml(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (10, 20, 30, 40))])
        ET.fromstring(svg)

    def test_unavailable_rendered_at_zero_with_marker(self):
        svg = render_radar_svg(self.AXES, [RadarSeries("s", (50, None, 50, 50))])
        pts = polygon_points(svg)[0]
        assert math.hypot(pts[1][0] - CENTER, pts[1][1] - CENTER) <= 0.5
        assert "stroke-dasharray" in svg

    def test_byte_identical_rerun(self, tmp_path):
        series = [RadarSeries("a", (10, 50, 90, None))]
        p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_radar_svg(self.AXES, series, p1)
        emit_radar_svg(self.AXES, series, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_min_axes(self):
        with pytest.raises(ReportError, match="axes"):
            render_radar_svg(["1"], [RadarSeries("s", (50,))])

    def test_mismatched_axes_rejected(self):
        with pytest.raises(ReportError):
            render_radar_svg(self.AXES, [RadarSeries("s", (1, 2))])

    def test_series_count_limits(self):
        many = [RadarSeries(f"s{i}", (1, 2, 3, 4)) for i in range(7)]
        with pytest.raises(ReportError):
            render_radar_svg(self.AXES, many)


class TestEmitReport:
    def make_planted_records(self):
        rng = np.random.default_rng(30)
        labels = {i: SceneLabels(int(rng.integers(0, 2)), int(rng.integers(0, 2)),
                                 int(i <= 24)) for i in range(1, 49)}
        records = []
        for step in (2, 3, 4):
            for i in range(1, 49):
                base = 0.9 if labels[i].simple else 0.1
                rate = base + float(rng.uniform(0, 0.05))
                n_rep = round(rate * 1000)
                records.append(RepeatabilityRecord(i, "mock", "gaussian-blur", step,
                                                   n_rep / 1000, 1000, n_rep))
        return records, labels

    def test_planted_bias_polygon_ordering(self, tmp_path):
        records, labels = self.make_planted_records()
        vectors = trait_index_table(records, labels, j=20)
        written = emit_report(vectors, tmp_path)
        top_svg = next(p for p in written if p.name == "mock_gaussian-blur_top.svg")
        polys = polygon_points(top_svg.read_text())
        # Series order F, G, H; H is planted at 100%, so its polygon lies
        # strictly outside G's at every axis.
        g_poly, h_poly = polys[1], polys[2]
        for (gx, gy), (hx, hy) in zip(g_poly, h_poly):
            assert math.hypot(hx - CENTER, hy - CENTER) > math.hypot(
                gx - CENTER, gy - CENTER)

    def test_one_svg_per_chart_plus_table(self, tmp_path):
        records, labels = self.make_planted_records()
        vectors = trait_index_table(records, labels, j=20)
        written = emit_report(vectors, tmp_path)
        names = {p.name for p in written}
        assert names == {"trait_indices.csv", "mock_gaussian-blur_top.svg",
                         "mock_gaussian-blur_lowest.svg"}
