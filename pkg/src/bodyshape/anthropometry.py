"""Bust/waist/hip line placement and pixel-to-centimetre measurement.

Lines anchor on the shoulder and hip keypoints: the bust sits at a fixed
fraction of the shoulder-to-hip span, the waist is the narrowest central
row inside a search window around its expected fraction, and the hip is
the widest central row in a window straddling the hip keypoints. Widths
convert to centimetres through the stature-derived scale, either as raw
frontal widths or as estimated ellipse circumferences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from bodyshape import coco
from bodyshape.errors import (
    EmptyRow,
    LineOutsideMask,
    LowConfidencePose,
    UpsideDown,
)
from bodyshape.inference.base import DEFAULT_TAU_KP, KeypointSet
from bodyshape.ingest import HeightCm
from bodyshape.silhouette import (
    BinaryMask,
    RowSpan,
    central_row_span,
    mask_height_px,
)

FRONTAL_WIDTH = "frontal_width"
EST_CIRCUMFERENCE = "est_circumference"
CONVENTIONS = (FRONTAL_WIDTH, EST_CIRCUMFERENCE)


@dataclass(frozen=True)
class AnthroConfig:
    """Anatomical priors for line placement, as fractions of the
    shoulder-to-hip keypoint span, plus depth/width aspect ratios for the
    circumference estimate."""

    bust_fraction: float = 0.31
    waist_fraction: float = 0.62
    waist_search_halfwindow: float = 0.10
    hip_search_window_up: float = 0.05
    hip_search_window_down: float = 0.15
    aspect_bust: float = 0.70
    aspect_waist: float = 0.75
    aspect_hip: float = 0.80
    convention: str = FRONTAL_WIDTH

    def __post_init__(self):
        for name in ("bust_fraction", "waist_fraction", "waist_search_halfwindow",
                     "hip_search_window_up", "hip_search_window_down"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.bust_fraction >= self.waist_fraction:
            raise ValueError("bust_fraction must be below waist_fraction")
        for name in ("aspect_bust", "aspect_waist", "aspect_hip"):
            v = getattr(self, name)
            if not 0.3 < v <= 1.0:
                raise ValueError(f"{name} must be in (0.3, 1.0], got {v}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")


@dataclass(frozen=True)
class PxToCm:
    """Centimetres per pixel: subject height over silhouette pixel height."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class BodyLines:
    """The three measurement rows with their central spans."""

    bust: RowSpan
    waist: RowSpan
    hip: RowSpan

    def __post_init__(self):
        if not self.bust.row < self.waist.row < self.hip.row:
            raise ValueError(
                f"rows must be ordered bust < waist < hip, got "
                f"{self.bust.row}, {self.waist.row}, {self.hip.row}"
            )


@dataclass(frozen=True)
class Measurements:
    """Bust/waist/hip in centimetres under the recorded convention."""

    bust: float
    waist: float
    hip: float
    convention: str = FRONTAL_WIDTH

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")


def px_to_cm(height: HeightCm, mask: BinaryMask) -> PxToCm:
    """scale = height_cm / mask pixel height; raises EmptyMask."""
    return PxToCm(height.value / mask_height_px(mask))


def ellipse_circumference(width_cm: float, aspect: float) -> float:
    """Perimeter of an ellipse with frontal width ``width_cm`` and
    depth = aspect * width, via Ramanujan's first approximation."""
    if width_cm <= 0:
        raise ValueError(f"width must be positive, got {width_cm}")
    if not 0.3 < aspect <= 1.0:
        raise ValueError(f"aspect must be in (0.3, 1.0], got {aspect}")
    a = width_cm / 2.0
    b = aspect * a
    return math.pi * (3.0 * (a + b) - math.sqrt((3.0 * a + b) * (a + 3.0 * b)))


def _span_width(mask: BinaryMask, row: int) -> int | None:
    try:
        return central_row_span(mask, row).width_px
    except EmptyRow:
        return None


def _best_row(
    mask: BinaryMask,
    lo: int,
    hi: int,
    center: float,
    want_max: bool,
) -> int | None:
    """Extremal-width row in [lo, hi]; ties to the row nearest ``center``,
    then the smaller row. Rows without person pixels are skipped."""
    best_row = None
    best_width = None
    best_dist = None
    for row in range(lo, hi + 1):
        width = _span_width(mask, row)
        if width is None:
            continue
        dist = abs(row - center)
        better = (
            best_width is None
            or (width > best_width if want_max else width < best_width)
            or (width == best_width and dist < best_dist)
        )
        if better:
            best_row, best_width, best_dist = row, width, dist
    return best_row


def locate_lines(
    kp: KeypointSet,
    mask: BinaryMask,
    cfg: AnthroConfig | None = None,
    tau_kp: float = DEFAULT_TAU_KP,
) -> BodyLines:
    """Place the three measurement rows from keypoints plus the mask.

    The waist and hip windows are clamped to start strictly below the
    previous line so the bust < waist < hip ordering holds for any valid
    configuration.
    """
    cfg = cfg or AnthroConfig()
    weak = [i for i in coco.TORSO_KEYPOINTS if kp.conf[i] < tau_kp]
    if weak:
        raise LowConfidencePose(f"torso keypoints {weak} below confidence {tau_kp:g}")

    shoulder_row = (kp.y(coco.LEFT_SHOULDER) + kp.y(coco.RIGHT_SHOULDER)) / 2.0
    hip_kp_row = (kp.y(coco.LEFT_HIP) + kp.y(coco.RIGHT_HIP)) / 2.0
    if shoulder_row >= hip_kp_row:
        raise UpsideDown(
            f"shoulders (row {shoulder_row:.1f}) not above hips (row {hip_kp_row:.1f})"
        )
    span = hip_kp_row - shoulder_row
    last_row = mask.height - 1

    bust_row = round(shoulder_row + cfg.bust_fraction * span)
    if not 0 <= bust_row <= last_row or _span_width(mask, bust_row) is None:
        raise LineOutsideMask(f"bust row {bust_row} has no person pixels")
    bust = central_row_span(mask, bust_row)

    waist_center = shoulder_row + cfg.waist_fraction * span
    half = cfg.waist_search_halfwindow * span
    lo = max(math.ceil(waist_center - half), bust_row + 1, 0)
    hi = min(math.floor(waist_center + half), last_row)
    waist_row = _best_row(mask, lo, hi, waist_center, want_max=False)
    if waist_row is None:
        raise LineOutsideMask(f"waist window [{lo}, {hi}] has no person pixels")
    waist = central_row_span(mask, waist_row)

    hip_lo_f = hip_kp_row - cfg.hip_search_window_up * span
    hip_hi_f = hip_kp_row + cfg.hip_search_window_down * span
    hip_center = (hip_lo_f + hip_hi_f) / 2.0
    lo = max(math.ceil(hip_lo_f), waist_row + 1, 0)
    hi = min(math.floor(hip_hi_f), last_row)
    hip_row = _best_row(mask, lo, hi, hip_center, want_max=True)
    if hip_row is None:
        raise LineOutsideMask(f"hip window [{lo}, {hi}] has no person pixels")
    hip = central_row_span(mask, hip_row)

    return BodyLines(bust, waist, hip)


def measure(lines: BodyLines, scale: PxToCm, cfg: AnthroConfig | None = None) -> Measurements:
    """Convert the three spans to centimetres under the configured convention."""
    cfg = cfg or AnthroConfig()
    widths_cm = {
        "bust": lines.bust.width_px * scale.scale,
        "waist": lines.waist.width_px * scale.scale,
        "hip": lines.hip.width_px * scale.scale,
    }
    for name, value in widths_cm.items():
        if value <= 0:
            raise ValueError(f"{name} width must be positive, got {value}")
    if cfg.convention == FRONTAL_WIDTH:
        return Measurements(
            widths_cm["bust"], widths_cm["waist"], widths_cm["hip"], FRONTAL_WIDTH
        )
    return Measurements(
        ellipse_circumference(widths_cm["bust"], cfg.aspect_bust),
        ellipse_circumference(widths_cm["waist"], cfg.aspect_waist),
        ellipse_circumference(widths_cm["hip"], cfg.aspect_hip),
        EST_CIRCUMFERENCE,
    )
