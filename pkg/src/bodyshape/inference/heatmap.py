"""Keypoint heatmap decoding with quarter-cell offset refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bodyshape.coco import NUM_KEYPOINTS
from bodyshape.inference.base import KeypointSet


@dataclass
class Heatmaps:
    """17 activation grids plus the affine map from grid to source pixels.

    ``transform`` is 2x3: ``[x_src, y_src]^T = transform @ [x_grid, y_grid, 1]^T``.
    """

    maps: np.ndarray
    transform: np.ndarray

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.float64)
        if maps.ndim != 3 or maps.shape[0] != NUM_KEYPOINTS:
            raise ValueError(f"maps must be ({NUM_KEYPOINTS}, h, w)")
        if np.any(maps < 0):
            raise ValueError("activations must be non-negative")
        t = np.asarray(self.transform, dtype=np.float64)
        if t.shape != (2, 3):
            raise ValueError("transform must be 2x3")
        if abs(np.linalg.det(t[:, :2])) < 1e-12:
            raise ValueError("transform must be invertible")
        self.maps = maps
        self.transform = t


def _axis_shift(grid: np.ndarray, py: int, px: int, axis: int) -> float:
    """Quarter-cell shift along one axis, toward the larger neighbour.

    A neighbour outside the grid counts as smaller than any activation, so
    edge peaks shift inward; with no neighbour on either side (size-1 axis)
    there is no shift. Equal neighbours tie toward the positive direction,
    the first one compared.
    """
    if axis == 0:
        size, pos = grid.shape[0], py
        plus = grid[py + 1, px] if py + 1 < size else -np.inf
        minus = grid[py - 1, px] if py - 1 >= 0 else -np.inf
    else:
        size, pos = grid.shape[1], px
        plus = grid[py, px + 1] if px + 1 < size else -np.inf
        minus = grid[py, px - 1] if px - 1 >= 0 else -np.inf
    if size == 1:
        return 0.0
    return 0.25 if plus >= minus else -0.25


def decode_heatmaps(h: Heatmaps) -> KeypointSet:
    """Decode each channel to a source-coordinate keypoint.

    Location is the first-occurrence argmax cell shifted a quarter cell per
    axis toward the larger neighbour, then pushed through the affine
    transform. Confidence is the peak activation clamped to [0, 1]; a
    degenerate all-equal channel keeps the tie-broken location but is
    flagged with confidence 0.
    """
    n, gh, gw = h.maps.shape
    xy = np.empty((n, 2), dtype=np.float64)
    conf = np.empty(n, dtype=np.float64)
    for k in range(n):
        grid = h.maps[k]
        flat = int(np.argmax(grid))
        py, px = divmod(flat, gw)
        gx = px + _axis_shift(grid, py, px, axis=1)
        gy = py + _axis_shift(grid, py, px, axis=0)
        xy[k, 0] = h.transform[0, 0] * gx + h.transform[0, 1] * gy + h.transform[0, 2]
        xy[k, 1] = h.transform[1, 0] * gx + h.transform[1, 1] * gy + h.transform[1, 2]
        peak = grid[py, px]
        degenerate = bool(np.all(grid == peak))
        conf[k] = 0.0 if degenerate else min(max(float(peak), 0.0), 1.0)
    return KeypointSet(xy, conf)
