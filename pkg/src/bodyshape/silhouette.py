"""Silhouette cleanup and row-width measurement primitives.

Turns the multi-class label map into a single-person binary mask (largest
4-connected component, holes filled) and provides the central-run row scan
that keeps arms hanging beside the torso from inflating bust/waist/hip
widths.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from bodyshape import kernels
from bodyshape.errors import EmptyMask, EmptyRow, NoPersonDetected
from bodyshape.inference.base import BoundingBox, LabelMap, VOC_PERSON


@dataclass
class BinaryMask:
    """Person/background silhouette; true = person."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError("mask must be a 2-D array")
        self.bits = bits.astype(bool, copy=False)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class RowSpan:
    """One contiguous run of person pixels on a row, inclusive columns."""

    row: int
    left: int
    right: int

    @property
    def width_px(self) -> int:
        return self.right - self.left + 1


def binarize_person(lm: LabelMap) -> BinaryMask:
    """True exactly where the label map says `person` (VOC class 15)."""
    bits = lm.labels == VOC_PERSON
    if not bits.any():
        raise NoPersonDetected("label map has zero person pixels")
    return BinaryMask(bits)


def largest_component(m: BinaryMask) -> BinaryMask:
    """Keep only the largest 4-connected component.

    Ties go to the component whose origin (topmost, then leftmost pixel)
    comes first, which is the lowest label the kernels assign.
    """
    if not m.bits.any():
        raise EmptyMask("mask has no true pixels")
    labels, n = kernels.label_components(m.bits)
    if n == 1:
        return BinaryMask(m.bits.copy())
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    keep = int(np.argmax(sizes)) + 1  # argmax returns the first max: tie-break
    return BinaryMask(labels == keep)


def fill_holes(m: BinaryMask) -> BinaryMask:
    """Fill every false region not 4-connected to the image border."""
    return BinaryMask(kernels.fill_holes(m.bits))


def open_mask(m: BinaryMask) -> BinaryMask:
    """Morphological opening with a 3x3 cross; optional noise trim."""
    bits = m.bits
    pad = np.zeros((m.height + 2, m.width + 2), dtype=bool)
    pad[1:-1, 1:-1] = bits
    eroded = (
        pad[1:-1, 1:-1]
        & pad[:-2, 1:-1]
        & pad[2:, 1:-1]
        & pad[1:-1, :-2]
        & pad[1:-1, 2:]
    )
    pad[1:-1, 1:-1] = eroded
    dilated = (
        pad[1:-1, 1:-1]
        | pad[:-2, 1:-1]
        | pad[2:, 1:-1]
        | pad[1:-1, :-2]
        | pad[1:-1, 2:]
    )
    return BinaryMask(dilated)


def clean_mask(lm: LabelMap, opening: bool = False) -> BinaryMask:
    """binarize -> (optional opening) -> largest component -> fill holes.

    The result satisfies the mask invariants: exactly one 4-connected
    component and no interior holes.
    """
    mask = binarize_person(lm)
    if opening:
        opened = open_mask(mask)
        if opened.bits.any():  # opening may erase a tiny person entirely
            mask = opened
    return fill_holes(largest_component(mask))


def mask_height_px(m: BinaryMask) -> int:
    """Head-to-feet pixel extent: bottom true row - top true row + 1."""
    rows = np.flatnonzero(m.bits.any(axis=1))
    if rows.size == 0:
        raise EmptyMask("mask has no true pixels")
    return int(rows[-1] - rows[0] + 1)


def mask_centroid_col(m: BinaryMask) -> float:
    """Mean column index over all true pixels."""
    per_col = m.bits.sum(axis=0)
    total = per_col.sum()
    if total == 0:
        raise EmptyMask("mask has no true pixels")
    return float((per_col * np.arange(m.width)).sum() / total)


def person_bbox(m: BinaryMask) -> BoundingBox:
    """Tight inclusive bounding box of the true pixels."""
    rows = np.flatnonzero(m.bits.any(axis=1))
    cols = np.flatnonzero(m.bits.any(axis=0))
    if rows.size == 0:
        raise EmptyMask("mask has no true pixels")
    return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))


def central_row_span(m: BinaryMask, row: int) -> RowSpan:
    """The contiguous run on ``row`` containing (or nearest) the centroid column."""
    if not 0 <= row < m.height:
        raise EmptyRow(f"row {row} outside mask of height {m.height}")
    left, right = kernels.central_run(m.bits[row], mask_centroid_col(m))
    if left < 0:
        raise EmptyRow(f"row {row} has no person pixels")
    return RowSpan(row, left, right)


def save_mask_png(m: BinaryMask, path: str | Path) -> Path:
    """Serialize as a 1-bit PNG (fixtures, debugging)."""
    path = Path(path)
    Image.fromarray(m.bits).convert("1").save(path)
    return path


def load_mask_png(path: str | Path) -> BinaryMask:
    arr = np.asarray(Image.open(path).convert("1"), dtype=bool)
    return BinaryMask(arr)
