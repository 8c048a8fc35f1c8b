"""Synthetic silhouette oracle: bodies with known widths, rows, and class.

Rasterizes an upright torso whose piecewise-linear width profile passes
exactly through the planted bust/waist/hip widths at the planted rows,
with arms as vertical strips disjoint from the torso at every measured
row (they join at a shoulder bridge so the figure stays one component).
Shoulder/hip keypoints are planted by inverting the line-placement
fractions, so the measurement windows are guaranteed to contain the
planted rows and the whole geometric pipeline can be checked end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from bodyshape import coco
from bodyshape.anthropometry import (
    EST_CIRCUMFERENCE,
    FRONTAL_WIDTH,
    AnthroConfig,
    Measurements,
    ellipse_circumference,
)
from bodyshape.classifier import BodyShape, ClassifierConfig, classify
from bodyshape.errors import InfeasibleParams
from bodyshape.inference.base import KeypointSet, LabelMap, VOC_PERSON
from bodyshape.silhouette import BinaryMask


@dataclass(frozen=True)
class SynthParams:
    """Geometry of one synthetic body, all lengths in pixels."""

    image_width: int = 560
    image_height: int = 840
    height_cm: float = 160.0
    stature_px: int = 800
    top_row: int = 20
    center_col: int = 280
    bust_row: int = 244
    waist_row: int = 316
    hip_row: int = 416
    bust_width_px: int = 230
    waist_width_px: int = 220
    hip_width_px: int = 230
    shoulder_width_px: int = 240
    head_height_px: int = 110
    head_width_px: int = 80
    neck_width_px: int = 44
    crotch_drop_px: int = 24
    leg_width_px: int = 70
    leg_gap_px: int = 24
    arm_width_px: int = 16
    arm_gap_px: int = 6
    bridge_rows: int = 3

    @property
    def bottom_row(self) -> int:
        return self.top_row + self.stature_px - 1

    @property
    def crotch_row(self) -> int:
        return self.hip_row + self.crotch_drop_px

    @property
    def crotch_width_px(self) -> int:
        return 2 * self.leg_width_px + self.leg_gap_px


@dataclass(frozen=True)
class SynthResult:
    """A planted body plus every ground truth the pipeline should recover."""

    mask: BinaryMask
    keypoints: KeypointSet
    measurements: Measurements
    shape: BodyShape
    params: SynthParams
    scale_cm_per_px: float

    def label_map(self) -> LabelMap:
        return LabelMap(np.where(self.mask.bits, VOC_PERSON, 0).astype(np.uint8))

    def render(self) -> np.ndarray:
        """Flat-shaded RGB stand-in for a subject photo."""
        gray = np.where(self.mask.bits, 70, 205).astype(np.uint8)
        return np.repeat(gray[:, :, np.newaxis], 3, axis=2)


def _run_bounds(row: np.ndarray) -> list[tuple[int, int]]:
    idx = np.flatnonzero(row)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    lefts = idx[np.concatenate(([0], breaks + 1))]
    rights = idx[np.concatenate((breaks, [idx.size - 1]))]
    return list(zip(lefts.tolist(), rights.tolist()))


def _centered_cols(center: int, width: int) -> tuple[int, int]:
    left = center - (width - 1) // 2
    return left, left + width - 1


def invert_fractions(p: SynthParams, cfg: AnthroConfig) -> tuple[float, float]:
    """Shoulder keypoint row and span that place the planted bust/waist rows."""
    gap = cfg.waist_fraction - cfg.bust_fraction
    span = (p.waist_row - p.bust_row) / gap
    shoulder_row = p.bust_row - cfg.bust_fraction * span
    return shoulder_row, span


def synth_silhouette(
    p: SynthParams,
    cfg: AnthroConfig | None = None,
    classifier_cfg: ClassifierConfig | None = None,
) -> SynthResult:
    """Rasterize the body and return it with its ground truths.

    Raises InfeasibleParams when the geometry cannot honour the oracle
    guarantees (exact planted widths at planted rows, one component,
    measurement windows containing the planted rows).
    """
    cfg = cfg or AnthroConfig()
    classifier_cfg = classifier_cfg or ClassifierConfig()
    w, h = p.image_width, p.image_height

    if not p.bust_row < p.waist_row < p.hip_row:
        raise InfeasibleParams("rows must be ordered bust < waist < hip")
    for name in ("bust_width_px", "waist_width_px", "hip_width_px", "arm_width_px",
                 "leg_width_px", "head_width_px", "neck_width_px", "shoulder_width_px",
                 "stature_px", "head_height_px"):
        if getattr(p, name) <= 0:
            raise InfeasibleParams(f"{name} must be positive")
    if p.arm_gap_px < 1:
        raise InfeasibleParams("arm_gap_px must be >= 1: a zero gap merges the arm "
                               "and torso runs at the measured rows")
    if p.waist_width_px >= min(p.bust_width_px, p.hip_width_px):
        raise InfeasibleParams("waist must be strictly narrower than bust and hip "
                               "so the window searches recover the planted rows")
    if p.crotch_width_px >= p.hip_width_px:
        raise InfeasibleParams("crotch must be narrower than the hip")
    if p.top_row < 0 or p.bottom_row > h - 1:
        raise InfeasibleParams("stature does not fit the image vertically")
    if p.crotch_row >= p.bottom_row:
        raise InfeasibleParams("no room for legs below the crotch")

    shoulder_row, span = invert_fractions(p, cfg)
    hip_kp_row = shoulder_row + span
    torso_top = int(math.floor(shoulder_row))
    neck_bottom = torso_top - 1
    neck_top = p.top_row + p.head_height_px
    if neck_top > neck_bottom:
        raise InfeasibleParams("head and neck do not fit above the shoulders")
    if p.bust_row <= torso_top + p.bridge_rows:
        raise InfeasibleParams("bust row collides with the shoulder bridge")
    if p.crotch_row <= p.hip_row:
        raise InfeasibleParams("crotch_drop_px must be positive")

    # Measurement windows must contain the planted rows.
    waist_center = shoulder_row + cfg.waist_fraction * span
    half = cfg.waist_search_halfwindow * span
    if not math.ceil(waist_center - half) <= p.waist_row <= math.floor(waist_center + half):
        raise InfeasibleParams("waist row escapes its search window")
    hip_lo = hip_kp_row - cfg.hip_search_window_up * span
    hip_hi = hip_kp_row + cfg.hip_search_window_down * span
    if not math.ceil(hip_lo) <= p.hip_row <= math.floor(hip_hi):
        raise InfeasibleParams("hip row escapes its search window")

    cx = p.center_col
    arm_top = torso_top + p.bridge_rows
    # Hands reach a little below the hip joints so arm runs flank all
    # three measured rows.
    arm_bottom = min(int(round(hip_kp_row + 0.1 * span)), p.crotch_row - 1)
    if arm_bottom <= arm_top:
        raise InfeasibleParams("arms have no vertical extent")

    max_torso_w = max(p.shoulder_width_px, p.bust_width_px, p.waist_width_px,
                      p.hip_width_px, p.crotch_width_px)
    torso_right_max = cx + max_torso_w // 2
    torso_left_min = cx - (max_torso_w - 1) // 2
    arm_r_left = torso_right_max + 1 + p.arm_gap_px
    arm_r_right = arm_r_left + p.arm_width_px - 1
    arm_l_right = torso_left_min - 1 - p.arm_gap_px
    arm_l_left = arm_l_right - p.arm_width_px + 1
    if arm_l_left < 1 or arm_r_right > w - 2:
        raise InfeasibleParams("torso plus arms do not fit the image horizontally")

    mask = np.zeros((h, w), dtype=bool)

    head_l, head_r = _centered_cols(cx, p.head_width_px)
    mask[p.top_row:neck_top, head_l:head_r + 1] = True
    neck_l, neck_r = _centered_cols(cx, p.neck_width_px)
    mask[neck_top:torso_top, neck_l:neck_r + 1] = True

    rows = np.arange(torso_top, p.crotch_row + 1)
    profile_rows = [torso_top, p.bust_row, p.waist_row, p.hip_row, p.crotch_row]
    profile_widths = [p.shoulder_width_px, p.bust_width_px, p.waist_width_px,
                      p.hip_width_px, p.crotch_width_px]
    widths = np.rint(np.interp(rows, profile_rows, profile_widths)).astype(np.int64)
    lefts = cx - (widths - 1) // 2
    rights = lefts + widths - 1
    cols = np.arange(w)
    mask[rows[0]:rows[-1] + 1] |= (cols >= lefts[:, None]) & (cols <= rights[:, None])

    # Shoulder bridge joins the arms so the figure is one component.
    mask[torso_top:arm_top, arm_l_left:arm_r_right + 1] = True
    mask[arm_top:arm_bottom + 1, arm_l_left:arm_l_right + 1] = True
    mask[arm_top:arm_bottom + 1, arm_r_left:arm_r_right + 1] = True

    leg_extent_l, _ = _centered_cols(cx, p.crotch_width_px)
    mask[p.crotch_row + 1:p.bottom_row + 1, leg_extent_l:leg_extent_l + p.leg_width_px] = True
    right_leg_l = leg_extent_l + p.leg_width_px + p.leg_gap_px
    mask[p.crotch_row + 1:p.bottom_row + 1, right_leg_l:right_leg_l + p.leg_width_px] = True

    # Oracle self-check: at each measured row the torso must be its own run
    # of exactly the planted width, flanked by disjoint arm runs.
    for row, planted in ((p.bust_row, p.bust_width_px),
                         (p.waist_row, p.waist_width_px),
                         (p.hip_row, p.hip_width_px)):
        runs = _run_bounds(mask[row])
        torso_runs = [r for r in runs if r[0] <= cx <= r[1]]
        if len(torso_runs) != 1:
            raise InfeasibleParams(f"row {row}: torso run is not unique")
        left, right = torso_runs[0]
        if right - left + 1 != planted:
            raise InfeasibleParams(
                f"row {row}: rasterized width {right - left + 1} != planted {planted}"
            )

    scale = p.height_cm / p.stature_px
    xy = np.zeros((coco.NUM_KEYPOINTS, 2))
    head_cy = p.top_row + 0.45 * p.head_height_px
    arm_cx_r = (arm_r_left + arm_r_right) / 2.0
    arm_cx_l = (arm_l_left + arm_l_right) / 2.0
    leg_cx_off = (p.leg_width_px + p.leg_gap_px) / 2.0
    knee_row = p.crotch_row + 0.45 * (p.bottom_row - p.crotch_row)
    xy[coco.NOSE] = (cx, head_cy)
    xy[coco.LEFT_EYE] = (cx + 0.18 * p.head_width_px, head_cy - 4)
    xy[coco.RIGHT_EYE] = (cx - 0.18 * p.head_width_px, head_cy - 4)
    xy[coco.LEFT_EAR] = (cx + 0.32 * p.head_width_px, head_cy)
    xy[coco.RIGHT_EAR] = (cx - 0.32 * p.head_width_px, head_cy)
    xy[coco.LEFT_SHOULDER] = (cx + 0.35 * p.shoulder_width_px, shoulder_row)
    xy[coco.RIGHT_SHOULDER] = (cx - 0.35 * p.shoulder_width_px, shoulder_row)
    xy[coco.LEFT_ELBOW] = (arm_cx_r, shoulder_row + 0.45 * span)
    xy[coco.RIGHT_ELBOW] = (arm_cx_l, shoulder_row + 0.45 * span)
    xy[coco.LEFT_WRIST] = (arm_cx_r, shoulder_row + 0.85 * span)
    xy[coco.RIGHT_WRIST] = (arm_cx_l, shoulder_row + 0.85 * span)
    xy[coco.LEFT_HIP] = (cx + 0.30 * p.hip_width_px, hip_kp_row)
    xy[coco.RIGHT_HIP] = (cx - 0.30 * p.hip_width_px, hip_kp_row)
    xy[coco.LEFT_KNEE] = (cx + leg_cx_off, knee_row)
    xy[coco.RIGHT_KNEE] = (cx - leg_cx_off, knee_row)
    xy[coco.LEFT_ANKLE] = (cx + leg_cx_off, p.bottom_row - 1)
    xy[coco.RIGHT_ANKLE] = (cx - leg_cx_off, p.bottom_row - 1)
    keypoints = KeypointSet(xy, np.ones(coco.NUM_KEYPOINTS))

    widths_cm = (p.bust_width_px * scale, p.waist_width_px * scale, p.hip_width_px * scale)
    if cfg.convention == FRONTAL_WIDTH:
        gt = Measurements(*widths_cm, FRONTAL_WIDTH)
    else:
        gt = Measurements(
            ellipse_circumference(widths_cm[0], cfg.aspect_bust),
            ellipse_circumference(widths_cm[1], cfg.aspect_waist),
            ellipse_circumference(widths_cm[2], cfg.aspect_hip),
            EST_CIRCUMFERENCE,
        )
    shape = classify(gt, classifier_cfg)
    return SynthResult(BinaryMask(mask), keypoints, gt, shape, p, scale)


# Widths (bust, waist, hip) in pixels at 0.2 cm/px chosen so each preset
# lands firmly inside its class with margin to spare under jitter.
PRESETS: dict[str, tuple[int, int, int]] = {
    "rectangle": (230, 220, 230),
    "triangle": (220, 217, 250),
    "inverted_triangle": (260, 220, 230),
    "spoon": (230, 200, 260),
    "hourglass": (260, 200, 260),
}

PRESET_CLASSES: dict[str, BodyShape] = {
    "rectangle": BodyShape.RECTANGLE,
    "triangle": BodyShape.TRIANGLE,
    "inverted_triangle": BodyShape.INVERTED_TRIANGLE,
    "spoon": BodyShape.SPOON,
    "hourglass": BodyShape.HOURGLASS,
}


def preset_params(
    name: str,
    rng: np.random.Generator | None = None,
) -> SynthParams:
    """Parameters for a named preset, with mild seeded jitter when a
    generator is supplied. Jitter scales all three widths together so the
    planted class never drifts."""
    if name not in PRESETS:
        raise InfeasibleParams(f"unknown preset {name!r}; choices: {sorted(PRESETS)}")
    bust, waist, hip = PRESETS[name]
    params = SynthParams(bust_width_px=bust, waist_width_px=waist, hip_width_px=hip)
    if rng is None:
        return params
    u = rng.uniform(0.985, 1.015)
    params = replace(
        params,
        bust_width_px=int(round(bust * u)),
        waist_width_px=int(round(waist * u)),
        hip_width_px=int(round(hip * u)),
        height_cm=float(params.height_cm * rng.uniform(0.995, 1.005)),
        shoulder_width_px=int(round(params.shoulder_width_px * rng.uniform(0.96, 1.04))),
        arm_gap_px=int(rng.integers(4, 10)),
        arm_width_px=int(rng.integers(12, 22)),
        leg_width_px=int(round(params.leg_width_px * rng.uniform(0.92, 1.08))),
    )
    return params


def make_preset(
    name: str,
    rng: np.random.Generator | None = None,
    cfg: AnthroConfig | None = None,
    classifier_cfg: ClassifierConfig | None = None,
) -> SynthResult:
    """Generate one preset body, asserting it lands in its nominal class."""
    result = synth_silhouette(preset_params(name, rng), cfg, classifier_cfg)
    if cfg is None and classifier_cfg is None and result.shape != PRESET_CLASSES[name]:
        raise InfeasibleParams(
            f"preset {name!r} produced {result.shape}; jitter margins violated"
        )
    return result


def _erode(bits: np.ndarray, steps: int) -> np.ndarray:
    out = bits.copy()
    for _ in range(steps):
        nxt = out.copy()
        nxt[1:, :] &= out[:-1, :]
        nxt[:-1, :] &= out[1:, :]
        nxt[:, 1:] &= out[:, :-1]
        nxt[:, :-1] &= out[:, 1:]
        nxt[0, :] = nxt[-1, :] = False
        nxt[:, 0] = nxt[:, -1] = False
        out = nxt
    return out


def _dilate(bits: np.ndarray, steps: int) -> np.ndarray:
    out = bits.copy()
    for _ in range(steps):
        nxt = out.copy()
        nxt[1:, :] |= out[:-1, :]
        nxt[:-1, :] |= out[1:, :]
        nxt[:, 1:] |= out[:, :-1]
        nxt[:, :-1] |= out[:, 1:]
        out = nxt
    return out


def inject_label_noise(
    lm: LabelMap,
    rng: np.random.Generator,
    speckles: int = 14,
    speckle_max: int = 9,
    holes: int = 6,
    hole_max: int = 5,
) -> LabelMap:
    """Clutter a label map without touching the person silhouette.

    Background speckles (random classes, including fake person blobs) stay
    clear of the real person; interior holes stay strictly inside it. The
    mask-cleanup stage must therefore reproduce the noise-free silhouette
    exactly, which is what the robustness checks assert.
    """
    labels = lm.labels.copy()
    person = labels == VOC_PERSON
    h, w = labels.shape
    forbidden = _dilate(person, 2)
    for _ in range(speckles):
        for _attempt in range(40):
            sh = int(rng.integers(1, speckle_max + 1))
            sw = int(rng.integers(1, speckle_max + 1))
            top = int(rng.integers(0, max(h - sh, 1)))
            left = int(rng.integers(0, max(w - sw, 1)))
            if not forbidden[top:top + sh, left:left + sw].any():
                cls = int(rng.integers(1, 21))
                labels[top:top + sh, left:left + sw] = cls
                break
    interior = _erode(person, hole_max + 1)
    centers = np.argwhere(interior)
    if centers.size:
        for _ in range(holes):
            cy, cx = centers[int(rng.integers(0, len(centers)))]
            hh = int(rng.integers(1, hole_max + 1))
            hw = int(rng.integers(1, hole_max + 1))
            labels[cy:cy + hh, cx:cx + hw] = 0
    return LabelMap(labels)
