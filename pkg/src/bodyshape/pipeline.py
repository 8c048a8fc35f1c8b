"""End-to-end run: image + height -> cleaned mask -> lines -> shape.

Keypoints are estimated on the background-subtracted image (person pixels
kept, background zeroed), matching the data flow the rest of the system
assumes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from bodyshape.anthropometry import (
    AnthroConfig,
    BodyLines,
    Measurements,
    PxToCm,
    locate_lines,
    measure,
    px_to_cm,
)
from bodyshape.classifier import BodyShape, ClassifierConfig, RuleTrace, rule_trace
from bodyshape.inference.base import (
    DEFAULT_TAU_KP,
    InferenceBackend,
    KeypointSet,
    estimate_keypoints,
    segment,
)
from bodyshape.ingest import HeightCm, RgbImage, SubjectRecord, load_image, validate_height
from bodyshape.silhouette import BinaryMask, clean_mask, mask_height_px, person_bbox


@dataclass(frozen=True)
class PipelineConfig:
    anthro: AnthroConfig = field(default_factory=AnthroConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    tau_kp: float = DEFAULT_TAU_KP
    opening: bool = False


@dataclass
class PipelineResult:
    shape: BodyShape
    measurements: Measurements
    lines: BodyLines
    scale: PxToCm
    mask_height_px: int
    keypoints: KeypointSet
    trace: RuleTrace
    mask: BinaryMask


def subtract_background(image: RgbImage, mask: BinaryMask) -> RgbImage:
    """Zero out everything the mask calls background."""
    pixels = np.where(mask.bits[:, :, np.newaxis], image.pixels, 0).astype(np.uint8)
    return RgbImage(pixels, source=image.source)


def run_pipeline(
    image: RgbImage,
    height: HeightCm,
    backend: InferenceBackend,
    cfg: PipelineConfig | None = None,
) -> PipelineResult:
    cfg = cfg or PipelineConfig()
    label_map = segment(image, backend)
    mask = clean_mask(label_map, opening=cfg.opening)
    box = person_bbox(mask)
    subtracted = subtract_background(image, mask)
    keypoints = estimate_keypoints(subtracted, box, backend, tau_kp=cfg.tau_kp)
    lines = locate_lines(keypoints, mask, cfg.anthro, tau_kp=cfg.tau_kp)
    scale = px_to_cm(height, mask)
    measurements = measure(lines, scale, cfg.anthro)
    trace = rule_trace(measurements, cfg.classifier)
    return PipelineResult(
        shape=trace.shape,
        measurements=measurements,
        lines=lines,
        scale=scale,
        mask_height_px=mask_height_px(mask),
        keypoints=keypoints,
        trace=trace,
        mask=mask,
    )


class _SerializedBackend(InferenceBackend):
    """Wraps a single-call-at-a-time backend behind a lock."""

    thread_safe = True

    def __init__(self, inner: InferenceBackend):
        self._inner = inner
        self._gate = threading.Lock()

    def segment(self, image):
        with self._gate:
            return self._inner.segment(image)

    def estimate_keypoints(self, image, person_box):
        with self._gate:
            return self._inner.estimate_keypoints(image, person_box)


def make_record_runner(backend: InferenceBackend, cfg: PipelineConfig | None = None):
    """Record -> PipelineResult closure for the evaluation harness.

    Backends that declare themselves single-call-at-a-time get serialized
    here so the harness may still fan records out across threads.
    """
    if not backend.thread_safe:
        backend = _SerializedBackend(backend)

    def run(record: SubjectRecord) -> PipelineResult:
        image = load_image(record.image_path)
        height = validate_height(record.height.value)
        return run_pipeline(image, height, backend, cfg)

    return run
