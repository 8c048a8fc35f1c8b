"""Pure-numpy mask kernels, the fallback when numba is unavailable.

label_components uses iterative neighbour-min propagation, so cost grows
with the geodesic diameter of the largest component; fine for moderate
masks, noticeably slower than the JIT path on large ones (see
``benchmarks/bench_kernels.py``).
"""

import numpy as np

_SENTINEL = np.iinfo(np.int64).max


def _propagate_min(lab, fg):
    out = lab.copy()
    out[1:, :] = np.minimum(out[1:, :], lab[:-1, :])
    out[:-1, :] = np.minimum(out[:-1, :], lab[1:, :])
    out[:, 1:] = np.minimum(out[:, 1:], lab[:, :-1])
    out[:, :-1] = np.minimum(out[:, :-1], lab[:, 1:])
    out[~fg] = _SENTINEL
    return out


def label_components(mask):
    """4-connected component labelling; see numba_impl for the contract."""
    fg = np.ascontiguousarray(mask, dtype=bool)
    h, w = fg.shape
    lab = np.where(fg, np.arange(h * w, dtype=np.int64).reshape(h, w), _SENTINEL)
    while True:
        nxt = _propagate_min(lab, fg)
        if np.array_equal(nxt, lab):
            break
        lab = nxt
    # Stable labels converge to each component's minimum linear index,
    # i.e. its topmost-then-leftmost pixel; sorting keeps that order.
    roots = np.unique(lab[fg])
    labels = np.zeros((h, w), np.int32)
    if roots.size:
        labels[fg] = np.searchsorted(roots, lab[fg]) + 1
    return labels, int(roots.size)


def fill_holes(mask):
    """Set true every false region not 4-connected to the image border."""
    bg = ~np.asarray(mask, dtype=bool)
    reach = np.zeros_like(bg)
    reach[0, :] = bg[0, :]
    reach[-1, :] = bg[-1, :]
    reach[:, 0] = bg[:, 0]
    reach[:, -1] = bg[:, -1]
    while True:
        grown = reach.copy()
        grown[1:, :] |= reach[:-1, :]
        grown[:-1, :] |= reach[1:, :]
        grown[:, 1:] |= reach[:, :-1]
        grown[:, :-1] |= reach[:, 1:]
        grown &= bg
        if np.array_equal(grown, reach):
            break
        reach = grown
    return np.asarray(mask, dtype=bool) | (bg & ~reach)


def central_run(row, centroid_col):
    """Pick the contiguous true run on ``row`` nearest the centroid column."""
    idx = np.flatnonzero(row)
    if idx.size == 0:
        return -1, -1
    breaks = np.flatnonzero(np.diff(idx) > 1)
    lefts = idx[np.concatenate(([0], breaks + 1))]
    rights = idx[np.concatenate((breaks, [idx.size - 1]))]
    contains = (lefts <= centroid_col) & (centroid_col <= rights)
    if contains.any():
        k = int(np.argmax(contains))
    else:
        k = int(np.argmin(np.abs((lefts + rights) / 2.0 - centroid_col)))
    return int(lefts[k]), int(rights[k])
