"""Fixture-replay backend: pre-recorded model outputs, no runtime needed.

Fixture layout, one directory per image::

    <root>/<image-stem>/labelmap.png     8-bit single channel, class indices
    <root>/<image-stem>/keypoints.json   array of 17 [x, y, conf]

Pointing the root directly at a per-image directory (one that itself
contains ``labelmap.png``) also works, which is what single-image
classification uses.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from bodyshape.coco import NUM_KEYPOINTS
from bodyshape.errors import BackendFailure
from bodyshape.inference.base import (
    BoundingBox,
    InferenceBackend,
    KeypointSet,
    LabelMap,
)
from bodyshape.ingest import RgbImage

LABELMAP_NAME = "labelmap.png"
KEYPOINTS_NAME = "keypoints.json"


def save_fixture(directory: str | Path, label_map: LabelMap, keypoints: KeypointSet) -> Path:
    """Write one image's recorded outputs in the replay layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    Image.fromarray(label_map.labels, mode="L").save(directory / LABELMAP_NAME)
    rows = [
        [float(keypoints.xy[i, 0]), float(keypoints.xy[i, 1]), float(keypoints.conf[i])]
        for i in range(NUM_KEYPOINTS)
    ]
    (directory / KEYPOINTS_NAME).write_text(json.dumps(rows, indent=1), encoding="utf-8")
    return directory


class ReplayBackend(InferenceBackend):
    """Returns recorded outputs keyed by the source image's file stem."""

    thread_safe = True

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise BackendFailure(f"replay root {self.root} is not a directory")
        # Single-fixture mode: the root itself holds the recordings.
        self._single = (self.root / LABELMAP_NAME).is_file()

    def _fixture_dir(self, image: RgbImage) -> Path:
        if self._single:
            return self.root
        if image.source is None:
            raise BackendFailure(
                "replay backend needs the image's source path to look up its fixture"
            )
        directory = self.root / Path(image.source).stem
        if not directory.is_dir():
            raise BackendFailure(f"no replay fixture at {directory}")
        return directory

    def segment(self, image: RgbImage) -> LabelMap:
        path = self._fixture_dir(image) / LABELMAP_NAME
        try:
            labels = np.asarray(Image.open(path).convert("L"), dtype=np.uint8)
        except OSError as exc:
            raise BackendFailure(f"cannot read {path}: {exc}") from exc
        if labels.shape != (image.height, image.width):
            raise BackendFailure(
                f"{path}: fixture is {labels.shape[1]}x{labels.shape[0]} but the "
                f"image is {image.width}x{image.height}"
            )
        return LabelMap(labels)

    def estimate_keypoints(self, image: RgbImage, person_box: BoundingBox) -> KeypointSet:
        path = self._fixture_dir(image) / KEYPOINTS_NAME
        try:
            rows = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendFailure(f"cannot read {path}: {exc}") from exc
        if not isinstance(rows, list) or len(rows) != NUM_KEYPOINTS:
            raise BackendFailure(f"{path}: expected {NUM_KEYPOINTS} [x, y, conf] rows")
        arr = np.asarray(rows, dtype=np.float64)
        if arr.shape != (NUM_KEYPOINTS, 3):
            raise BackendFailure(f"{path}: expected {NUM_KEYPOINTS} [x, y, conf] rows")
        try:
            return KeypointSet(arr[:, :2], arr[:, 2])
        except ValueError as exc:
            raise BackendFailure(f"{path}: {exc}") from exc


class StaticBackend(InferenceBackend):
    """Hands back planted outputs; the oracle backend for synthetic bodies."""

    thread_safe = True

    def __init__(self, label_map: LabelMap, keypoints: KeypointSet):
        self.label_map = label_map
        self.keypoints = keypoints

    def segment(self, image: RgbImage) -> LabelMap:
        return self.label_map

    def estimate_keypoints(self, image: RgbImage, person_box: BoundingBox) -> KeypointSet:
        return self.keypoints
