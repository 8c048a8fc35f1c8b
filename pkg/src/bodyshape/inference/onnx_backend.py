"""Portable-model backend: ONNX files referenced by a checksum manifest.

Model manifest JSON::

    {
      "segmentation": {"path": "segmentation.onnx", "sha256": "..."},
      "keypoints":    {"path": "keypoints.onnx",    "sha256": "..."}
    }

Paths resolve relative to the manifest file; checksums are verified before
a session is created. The onnxruntime import happens lazily inside the
default session factory, so everything up to the actual model call (and
all of the pre/post-processing) works without the runtime installed.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from PIL import Image

from bodyshape.errors import BackendFailure
from bodyshape.inference.base import (
    BoundingBox,
    InferenceBackend,
    KeypointSet,
    LabelMap,
    VOC_NUM_CLASSES,
)
from bodyshape.inference.heatmap import Heatmaps, decode_heatmaps
from bodyshape.ingest import RgbImage

# Preprocessing constants shared with the export tooling.
SEG_LONG_SIDE = 513
KP_INPUT_WIDTH = 288
KP_INPUT_HEIGHT = 384
BOX_EXPAND = 0.25
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _default_session_factory(model_path: Path):
    try:
        import onnxruntime
    except ImportError as exc:
        raise BackendFailure(
            "onnxruntime is not installed; install the 'onnx' extra or use "
            "a replay backend"
        ) from exc
    try:
        return onnxruntime.InferenceSession(
            str(model_path), providers=["CPUExecutionProvider"]
        )
    except Exception as exc:
        raise BackendFailure(f"cannot load {model_path}: {exc}") from exc


def normalize_image(pixels: np.ndarray) -> np.ndarray:
    """uint8 HWC image to float32 NCHW with ImageNet statistics."""
    arr = pixels.astype(np.float32) / 255.0
    arr -= np.asarray(IMAGENET_MEAN, dtype=np.float32)
    arr /= np.asarray(IMAGENET_STD, dtype=np.float32)
    return arr.transpose(2, 0, 1)[np.newaxis]


def expand_and_pad_box(
    box: BoundingBox, image_w: int, image_h: int
) -> tuple[float, float, float, float]:
    """Grow the person box 25% per side, then pad to the 3:4 crop aspect.

    Returns (left, top, width, height) as floats; the crop may extend past
    the image and gets zero-padded there.
    """
    cx = (box.left + box.right + 1) / 2.0
    cy = (box.top + box.bottom + 1) / 2.0
    w = box.width * (1.0 + 2.0 * BOX_EXPAND)
    h = box.height * (1.0 + 2.0 * BOX_EXPAND)
    target = KP_INPUT_WIDTH / KP_INPUT_HEIGHT
    if w / h < target:
        w = h * target
    else:
        h = w / target
    return cx - w / 2.0, cy - h / 2.0, w, h


def crop_with_padding(pixels: np.ndarray, left: float, top: float, w: float, h: float) -> np.ndarray:
    """Extract a possibly out-of-bounds crop, zero-padding the overhang."""
    ih, iw = pixels.shape[:2]
    l, t = int(round(left)), int(round(top))
    cw, ch = int(round(w)), int(round(h))
    out = np.zeros((ch, cw, 3), dtype=pixels.dtype)
    src_l, src_t = max(l, 0), max(t, 0)
    src_r, src_b = min(l + cw, iw), min(t + ch, ih)
    if src_r > src_l and src_b > src_t:
        out[src_t - t : src_b - t, src_l - l : src_r - l] = pixels[src_t:src_b, src_l:src_r]
    return out


class OnnxBackend(InferenceBackend):
    """Runs the exported segmentation and keypoint models."""

    thread_safe = True

    def __init__(self, manifest_path: str | Path, session_factory=None):
        self._factory = session_factory or _default_session_factory
        manifest_path = Path(manifest_path)
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendFailure(f"cannot read model manifest {manifest_path}: {exc}") from exc

        self._paths: dict[str, Path] = {}
        self._checksums: dict[str, str] = {}
        for role in ("segmentation", "keypoints"):
            entry = manifest.get(role)
            if not isinstance(entry, dict) or "path" not in entry or "sha256" not in entry:
                raise BackendFailure(
                    f"model manifest {manifest_path} lacks a {role} path/sha256 entry"
                )
            model_path = Path(entry["path"])
            if not model_path.is_absolute():
                model_path = manifest_path.parent / model_path
            if not model_path.is_file():
                raise BackendFailure(f"{role} model file {model_path} is missing")
            actual = file_sha256(model_path)
            if actual != entry["sha256"]:
                raise BackendFailure(
                    f"{role} model checksum mismatch: manifest says "
                    f"{entry['sha256'][:12]}..., file is {actual[:12]}..."
                )
            self._paths[role] = model_path
            self._checksums[role] = actual
        self._sessions: dict[str, object] = {}

    @property
    def checksums(self) -> dict[str, str]:
        return dict(self._checksums)

    def _session(self, role: str):
        if role not in self._sessions:
            self._sessions[role] = self._factory(self._paths[role])
        return self._sessions[role]

    def _run(self, role: str, batch: np.ndarray) -> np.ndarray:
        session = self._session(role)
        try:
            name = session.get_inputs()[0].name
            outputs = session.run(None, {name: batch})
        except Exception as exc:
            raise BackendFailure(f"{role} inference failed: {exc}") from exc
        if not outputs:
            raise BackendFailure(f"{role} model produced no outputs")
        return np.asarray(outputs[0])

    def segment(self, image: RgbImage) -> LabelMap:
        scale = SEG_LONG_SIDE / max(image.width, image.height)
        in_w = max(1, int(round(image.width * scale)))
        in_h = max(1, int(round(image.height * scale)))
        resized = np.asarray(
            Image.fromarray(image.pixels).resize((in_w, in_h), Image.BILINEAR),
            dtype=np.uint8,
        )
        out = self._run("segmentation", normalize_image(resized))
        if out.ndim == 4 and out.shape[1] == VOC_NUM_CLASSES:
            labels = np.argmax(out[0], axis=0).astype(np.uint8)
        elif out.ndim == 3:
            labels = out[0].astype(np.uint8)
        elif out.ndim == 2:
            labels = out.astype(np.uint8)
        else:
            raise BackendFailure(
                f"segmentation output shape {out.shape} is not class scores or labels"
            )
        # Nearest-neighbour keeps the label values discrete on the way back up.
        full = Image.fromarray(labels, mode="L").resize(
            (image.width, image.height), Image.NEAREST
        )
        return LabelMap(np.asarray(full, dtype=np.uint8))

    def estimate_keypoints(self, image: RgbImage, person_box: BoundingBox) -> KeypointSet:
        left, top, w, h = expand_and_pad_box(person_box, image.width, image.height)
        crop = crop_with_padding(image.pixels, left, top, w, h)
        resized = np.asarray(
            Image.fromarray(crop).resize((KP_INPUT_WIDTH, KP_INPUT_HEIGHT), Image.BILINEAR),
            dtype=np.uint8,
        )
        out = self._run("keypoints", normalize_image(resized))
        if out.ndim != 4 or out.shape[0] != 1:
            raise BackendFailure(f"keypoint output shape {out.shape} is not (1, 17, h, w)")
        maps = np.maximum(out[0].astype(np.float64), 0.0)
        grid_h, grid_w = maps.shape[1], maps.shape[2]
        crop_w, crop_h = crop.shape[1], crop.shape[0]
        transform = np.array(
            [
                [crop_w / grid_w, 0.0, round(left)],
                [0.0, crop_h / grid_h, round(top)],
            ],
            dtype=np.float64,
        )
        return decode_heatmaps(Heatmaps(maps, transform))
