"""Inference backend contract and its input/output types.

A backend exposes exactly two calls, ``segment`` and ``estimate_keypoints``,
so the whole geometric core can run against recorded fixtures with no model
runtime installed. Backends declare ``thread_safe``; callers serialize
access to backends that don't.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from bodyshape.coco import NUM_KEYPOINTS, TORSO_KEYPOINTS
from bodyshape.errors import BackendFailure, BodyShapeError, LowConfidencePose
from bodyshape.ingest import RgbImage

# PASCAL VOC 21-class palette index for `person`.
VOC_PERSON = 15
VOC_NUM_CLASSES = 21

DEFAULT_TAU_KP = 0.3


@dataclass
class LabelMap:
    """Per-pixel class indices in the 21-class VOC palette, source resolution."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError("labels must be a 2-D array")
        if lab.dtype != np.uint8:
            lab = lab.astype(np.uint8)
        if lab.max(initial=0) >= VOC_NUM_CLASSES:
            raise ValueError("label indices must be < 21")
        self.labels = lab

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass
class KeypointSet:
    """17 COCO-ordered keypoints: (x, y) source-image pixels plus confidence."""

    xy: np.ndarray
    conf: np.ndarray

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=np.float64)
        conf = np.asarray(self.conf, dtype=np.float64)
        if xy.shape != (NUM_KEYPOINTS, 2):
            raise ValueError(f"xy must be ({NUM_KEYPOINTS}, 2)")
        if conf.shape != (NUM_KEYPOINTS,):
            raise ValueError(f"conf must be ({NUM_KEYPOINTS},)")
        if conf.min() < 0.0 or conf.max() > 1.0:
            raise ValueError("confidences must lie in [0, 1]")
        self.xy = xy
        self.conf = conf

    def x(self, i: int) -> float:
        return float(self.xy[i, 0])

    def y(self, i: int) -> float:
        return float(self.xy[i, 1])


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel bounds of a mask region."""

    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if self.right < self.left or self.bottom < self.top:
            raise ValueError("degenerate bounding box")

    @property
    def width(self) -> int:
        return self.right - self.left + 1

    @property
    def height(self) -> int:
        return self.bottom - self.top + 1


class InferenceBackend(ABC):
    """Produces a label map and keypoints for an image.

    Implementations either guarantee concurrent read-only inference or set
    ``thread_safe = False`` and get serialized by the evaluation fan-out.
    """

    thread_safe: bool = True

    @abstractmethod
    def segment(self, image: RgbImage) -> LabelMap:
        """Class-label map at the source resolution."""

    @abstractmethod
    def estimate_keypoints(self, image: RgbImage, person_box: BoundingBox) -> KeypointSet:
        """17 keypoints in source-image pixel coordinates."""


def segment(image: RgbImage, backend: InferenceBackend) -> LabelMap:
    """Run segmentation, enforcing the source-resolution contract."""
    try:
        label_map = backend.segment(image)
    except BodyShapeError:
        raise
    except Exception as exc:
        raise BackendFailure(f"segmentation backend failed: {exc}") from exc
    if (label_map.height, label_map.width) != (image.height, image.width):
        raise BackendFailure(
            f"backend returned {label_map.width}x{label_map.height} label map "
            f"for a {image.width}x{image.height} image"
        )
    return label_map


def estimate_keypoints(
    image: RgbImage,
    person_box: BoundingBox,
    backend: InferenceBackend,
    tau_kp: float = DEFAULT_TAU_KP,
) -> KeypointSet:
    """Run pose estimation and gate on torso-keypoint confidence.

    Coordinates are clamped to the image bounds; shoulders and hips below
    ``tau_kp`` abort with LowConfidencePose since the measurement stage
    cannot anchor its lines without them.
    """
    try:
        kp = backend.estimate_keypoints(image, person_box)
    except BodyShapeError:
        raise
    except Exception as exc:
        raise BackendFailure(f"keypoint backend failed: {exc}") from exc

    xy = kp.xy.copy()
    xy[:, 0] = np.clip(xy[:, 0], 0.0, image.width - 1.0)
    xy[:, 1] = np.clip(xy[:, 1], 0.0, image.height - 1.0)
    kp = KeypointSet(xy, kp.conf)

    weak = [i for i in TORSO_KEYPOINTS if kp.conf[i] < tau_kp]
    if weak:
        worst = min(weak, key=lambda i: kp.conf[i])
        raise LowConfidencePose(
            f"torso keypoints {weak} below confidence {tau_kp:g} "
            f"(lowest: index {worst} at {kp.conf[worst]:.3f})"
        )
    return kp
