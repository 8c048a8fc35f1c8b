import math

import numpy as np
import pytest
from scipy import special

from bodyshape import coco
from bodyshape.anthropometry import (
    AnthroConfig,
    BodyLines,
    Measurements,
    PxToCm,
    ellipse_circumference,
    locate_lines,
    measure,
    px_to_cm,
)
from bodyshape.errors import (
    EmptyMask,
    LineOutsideMask,
    LowConfidencePose,
    UpsideDown,
)
from bodyshape.inference.base import KeypointSet
from bodyshape.ingest import HeightCm
from bodyshape.silhouette import BinaryMask, RowSpan, central_row_span


def _keypoints(shoulder_y=300.0, hip_y=590.0, conf=1.0, x=200.0):
    xy = np.full((coco.NUM_KEYPOINTS, 2), x, dtype=np.float64)
    xy[:, 1] = 100.0
    xy[coco.LEFT_SHOULDER] = (x - 40, shoulder_y)
    xy[coco.RIGHT_SHOULDER] = (x + 40, shoulder_y)
    xy[coco.LEFT_HIP] = (x - 25, hip_y)
    xy[coco.RIGHT_HIP] = (x + 25, hip_y)
    confs = np.full(coco.NUM_KEYPOINTS, conf, dtype=np.float64)
    return KeypointSet(xy, confs)


def _column_mask(height=1000, width=10, top=100, bottom=999):
    bits = np.zeros((height, width), dtype=bool)
    bits[top:bottom + 1, 4] = True
    return BinaryMask(bits)


def _profile_mask(nodes, height=700, width=400, cx=200):
    """V-profile torso: strictly sloped between the given (row, width) nodes."""
    rows = np.arange(nodes[0][0], nodes[-1][0] + 1)
    widths = np.rint(np.interp(rows, [n[0] for n in nodes],
                               [n[1] for n in nodes])).astype(int)
    bits = np.zeros((height, width), dtype=bool)
    lefts = cx - (widths - 1) // 2
    cols = np.arange(width)
    bits[rows[0]:rows[-1] + 1] = (cols >= lefts[:, None]) & (
        cols <= (lefts + widths - 1)[:, None]
    )
    return BinaryMask(bits)


# Slopes > 1 px/row around the extrema keep them strict after rounding.
HOURGLASS_NODES = [(280, 200), (440, 180), (484, 120), (605, 260), (650, 180)]


class TestPxToCm:
    def test_ratio(self):
        mask = _column_mask(top=100, bottom=999)  # height 900
        assert px_to_cm(HeightCm(180.0), mask).scale == pytest.approx(0.2)

    def test_other_ratio(self):
        mask = _column_mask(height=2000, top=100, bottom=1749)  # height 1650
        assert px_to_cm(HeightCm(165.0), mask).scale == pytest.approx(0.1)

    def test_empty_mask(self):
        with pytest.raises(EmptyMask):
            px_to_cm(HeightCm(180.0), BinaryMask(np.zeros((10, 10), dtype=bool)))

    def test_exactness(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            top = int(rng.integers(0, 400))
            bottom = int(rng.integers(top, 999))
            h = float(rng.uniform(100, 230))
            mask = _column_mask(top=top, bottom=bottom)
            scale = px_to_cm(HeightCm(h), mask)
            assert abs((bottom - top + 1) * scale.scale - h) <= 1e-9 * h


class TestEllipse:
    def test_circle(self):
        assert ellipse_circumference(20.0, 1.0) == pytest.approx(math.pi * 20.0)

    def test_against_exact_perimeter(self):
        # Exact perimeter via the complete elliptic integral of the 2nd kind.
        for width, aspect in [(60.0, 0.75), (20.0, 0.5), (95.0, 0.9), (40.0, 0.35)]:
            a = width / 2.0
            b = aspect * a
            exact = 4.0 * a * special.ellipe(1.0 - (b / a) ** 2)
            approx = ellipse_circumference(width, aspect)
            assert abs(approx - exact) / exact < 1e-3

    def test_spec_point_value(self):
        # a=30, b=22.5: pi * (3*(a+b) - sqrt((3a+b)(a+3b)))
        expected = math.pi * (3 * 52.5 - math.sqrt(112.5 * 97.5))
        assert ellipse_circumference(60.0, 0.75) == pytest.approx(expected)

    def test_vanishing_width(self):
        assert ellipse_circumference(1e-9, 0.75) < 1e-8

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            ellipse_circumference(-5.0, 0.75)
        with pytest.raises(ValueError):
            ellipse_circumference(10.0, 0.2)
        with pytest.raises(ValueError):
            ellipse_circumference(10.0, 1.2)


class TestLocateLines:
    def test_fixed_fraction_rows(self):
        mask = _profile_mask(HOURGLASS_NODES)
        lines = locate_lines(_keypoints(300.0, 590.0), mask)
        # span 290: bust at round(300 + 0.31*290) = 390
        assert lines.bust.row == 390
        # planted narrowest row inside the waist window [451, 508]
        assert lines.waist.row == 484
        # planted widest row inside the hip window [576, 633]
        assert lines.hip.row == 605

    def test_waist_is_global_min_in_window(self):
        mask = _profile_mask(HOURGLASS_NODES)
        lines = locate_lines(_keypoints(300.0, 590.0), mask)
        center = 300.0 + 0.62 * 290.0
        half = 0.10 * 290.0
        lo, hi = math.ceil(center - half), math.floor(center + half)
        widths = {r: central_row_span(mask, r).width_px for r in range(lo, hi + 1)}
        assert widths[lines.waist.row] == min(widths.values())

    def test_hip_is_global_max_in_window(self):
        mask = _profile_mask(HOURGLASS_NODES)
        lines = locate_lines(_keypoints(300.0, 590.0), mask)
        lo = math.ceil(590.0 - 0.05 * 290.0)
        hi = math.floor(590.0 + 0.15 * 290.0)
        widths = {r: central_row_span(mask, r).width_px for r in range(lo, hi + 1)}
        assert widths[lines.hip.row] == max(widths.values())

    def test_ordering_invariant(self):
        mask = _profile_mask(HOURGLASS_NODES)
        lines = locate_lines(_keypoints(300.0, 590.0), mask)
        assert lines.bust.row < lines.waist.row < lines.hip.row

    def test_upside_down(self):
        mask = _profile_mask(HOURGLASS_NODES)
        with pytest.raises(UpsideDown):
            locate_lines(_keypoints(590.0, 300.0), mask)

    def test_low_confidence(self):
        mask = _profile_mask(HOURGLASS_NODES)
        kp = _keypoints()
        kp.conf[coco.LEFT_HIP] = 0.1
        with pytest.raises(LowConfidencePose):
            locate_lines(kp, mask)

    def test_line_outside_mask(self):
        mask = _profile_mask(HOURGLASS_NODES)
        # bust row = round(10 + 0.31*580) = 190, above the mask top (280)
        with pytest.raises(LineOutsideMask):
            locate_lines(_keypoints(10.0, 590.0), mask)


class TestMeasure:
    def _lines(self, widths, rows=(390, 484, 605), cx=200):
        spans = []
        for row, w in zip(rows, widths):
            left = cx - (w - 1) // 2
            spans.append(RowSpan(row, left, left + w - 1))
        return BodyLines(*spans)

    def test_frontal_width(self):
        lines = self._lines((300, 200, 310))
        got = measure(lines, PxToCm(0.2), AnthroConfig())
        assert got == Measurements(60.0, 40.0, 62.0, "frontal_width")

    def test_est_circumference(self):
        cfg = AnthroConfig(convention="est_circumference")
        lines = self._lines((300, 200, 310))
        got = measure(lines, PxToCm(0.2), cfg)
        assert got.convention == "est_circumference"
        assert got.bust == pytest.approx(ellipse_circumference(60.0, 0.70))
        assert got.waist == pytest.approx(ellipse_circumference(40.0, 0.75))
        assert got.hip == pytest.approx(ellipse_circumference(62.0, 0.80))

    def test_zero_width_rejected(self):
        lines = self._lines((300, 200, 310))
        bad = BodyLines(lines.bust, RowSpan(484, 100, 99), lines.hip)
        with pytest.raises(ValueError):
            measure(bad, PxToCm(0.2), AnthroConfig())

    def test_resolution_invariance(self):
        # Doubling pixel widths while halving the scale preserves centimetres.
        lines = self._lines((300, 200, 310))
        # 2w - 1 + 1 = 2w px when spans double exactly
        doubled = BodyLines(
            RowSpan(390, 100, 100 + 600 - 1),
            RowSpan(484, 100, 100 + 400 - 1),
            RowSpan(605, 100, 100 + 620 - 1),
        )
        a = measure(lines, PxToCm(0.2), AnthroConfig())
        b = measure(doubled, PxToCm(0.1), AnthroConfig())
        assert (a.bust, a.waist, a.hip) == (b.bust, b.waist, b.hip)


class TestConfigValidation:
    def test_defaults(self):
        AnthroConfig()

    def test_fraction_ordering(self):
        with pytest.raises(ValueError):
            AnthroConfig(bust_fraction=0.7, waist_fraction=0.6)

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            AnthroConfig(waist_search_halfwindow=0.0)

    def test_aspect_bounds(self):
        with pytest.raises(ValueError):
            AnthroConfig(aspect_waist=0.25)

    def test_convention(self):
        with pytest.raises(ValueError):
            AnthroConfig(convention="girth")

    def test_body_lines_ordering_enforced(self):
        with pytest.raises(ValueError):
            BodyLines(RowSpan(400, 0, 10), RowSpan(390, 0, 10), RowSpan(605, 0, 10))
