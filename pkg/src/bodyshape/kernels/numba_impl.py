"""JIT-compiled mask kernels. Production path for the silhouette stage.

Same contracts as :mod:`bodyshape.kernels.numpy_impl`; the dispatcher in
``kernels/__init__`` picks one of the two at import time.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def label_components(mask):
    """4-connected component labelling.

    Returns (labels, n) where labels is int32 with 0 for background and
    1..n for components, numbered in row-major order of each component's
    first pixel (topmost row, then leftmost column).
    """
    h, w = mask.shape
    labels = np.zeros((h, w), np.int32)
    stack = np.empty(h * w, np.int64)
    n = 0
    for i in range(h):
        for j in range(w):
            if mask[i, j] and labels[i, j] == 0:
                n += 1
                labels[i, j] = n
                stack[0] = i * w + j
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    pi = p // w
                    pj = p - pi * w
                    if pi > 0 and mask[pi - 1, pj] and labels[pi - 1, pj] == 0:
                        labels[pi - 1, pj] = n
                        stack[top] = p - w
                        top += 1
                    if pi < h - 1 and mask[pi + 1, pj] and labels[pi + 1, pj] == 0:
                        labels[pi + 1, pj] = n
                        stack[top] = p + w
                        top += 1
                    if pj > 0 and mask[pi, pj - 1] and labels[pi, pj - 1] == 0:
                        labels[pi, pj - 1] = n
                        stack[top] = p - 1
                        top += 1
                    if pj < w - 1 and mask[pi, pj + 1] and labels[pi, pj + 1] == 0:
                        labels[pi, pj + 1] = n
                        stack[top] = p + 1
                        top += 1
    return labels, n


@njit(cache=True)
def fill_holes(mask):
    """Set true every false region not 4-connected to the image border."""
    h, w = mask.shape
    reach = np.zeros((h, w), np.bool_)
    stack = np.empty(h * w, np.int64)
    top = 0
    for j in range(w):
        if not mask[0, j] and not reach[0, j]:
            reach[0, j] = True
            stack[top] = j
            top += 1
        if not mask[h - 1, j] and not reach[h - 1, j]:
            reach[h - 1, j] = True
            stack[top] = (h - 1) * w + j
            top += 1
    for i in range(h):
        if not mask[i, 0] and not reach[i, 0]:
            reach[i, 0] = True
            stack[top] = i * w
            top += 1
        if not mask[i, w - 1] and not reach[i, w - 1]:
            reach[i, w - 1] = True
            stack[top] = i * w + w - 1
            top += 1
    while top > 0:
        top -= 1
        p = stack[top]
        pi = p // w
        pj = p - pi * w
        if pi > 0 and not mask[pi - 1, pj] and not reach[pi - 1, pj]:
            reach[pi - 1, pj] = True
            stack[top] = p - w
            top += 1
        if pi < h - 1 and not mask[pi + 1, pj] and not reach[pi + 1, pj]:
            reach[pi + 1, pj] = True
            stack[top] = p + w
            top += 1
        if pj > 0 and not mask[pi, pj - 1] and not reach[pi, pj - 1]:
            reach[pi, pj - 1] = True
            stack[top] = p - 1
            top += 1
        if pj < w - 1 and not mask[pi, pj + 1] and not reach[pi, pj + 1]:
            reach[pi, pj + 1] = True
            stack[top] = p + 1
            top += 1
    out = np.empty((h, w), np.bool_)
    for i in range(h):
        for j in range(w):
            out[i, j] = mask[i, j] or not reach[i, j]
    return out


@njit(cache=True)
def central_run(row, centroid_col):
    """Pick the contiguous true run on ``row`` nearest the centroid column.

    Returns (left, right) column indices inclusive, or (-1, -1) for an
    empty row. A run containing the centroid wins; otherwise the run whose
    center is closest to it (ties to the leftmost run).
    """
    w = row.shape[0]
    best_left = -1
    best_right = -1
    best_dist = 1e18
    j = 0
    while j < w:
        if row[j]:
            left = j
            while j < w and row[j]:
                j += 1
            right = j - 1
            if left <= centroid_col <= right:
                return left, right
            dist = abs((left + right) / 2.0 - centroid_col)
            if dist < best_dist:
                best_dist = dist
                best_left = left
                best_right = right
        else:
            j += 1
    return best_left, best_right
