"""Pluggable inference backends and their I/O types."""

from bodyshape.inference.base import (
    DEFAULT_TAU_KP,
    BoundingBox,
    InferenceBackend,
    KeypointSet,
    LabelMap,
    VOC_PERSON,
    estimate_keypoints,
    segment,
)
from bodyshape.inference.heatmap import Heatmaps, decode_heatmaps
from bodyshape.inference.onnx_backend import OnnxBackend, file_sha256
from bodyshape.inference.replay import ReplayBackend, StaticBackend, save_fixture

__all__ = [
    "DEFAULT_TAU_KP",
    "BoundingBox",
    "Heatmaps",
    "InferenceBackend",
    "KeypointSet",
    "LabelMap",
    "OnnxBackend",
    "ReplayBackend",
    "StaticBackend",
    "VOC_PERSON",
    "decode_heatmaps",
    "estimate_keypoints",
    "file_sha256",
    "save_fixture",
    "segment",
]
