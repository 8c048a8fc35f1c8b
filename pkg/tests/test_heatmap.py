import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bodyshape.coco import NUM_KEYPOINTS
from bodyshape.inference.heatmap import Heatmaps, decode_heatmaps

IDENTITY = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def _grids(*channels, gh=24, gw=32):
    """Stack the given 2-D channels, repeating the last to reach 17."""
    maps = list(channels)
    while len(maps) < NUM_KEYPOINTS:
        maps.append(maps[-1])
    return np.stack(maps[:NUM_KEYPOINTS])


def reference_decode(maps, transform):
    """Independent re-implementation of the decode rule: plain loops,
    no shared code with the production path."""
    out = []
    for grid in maps:
        gh, gw = grid.shape
        best, by, bx = -np.inf, 0, 0
        for y in range(gh):
            for x in range(gw):
                if grid[y, x] > best:
                    best, by, bx = grid[y, x], y, x
        x = float(bx)
        if gw > 1:
            right = grid[by, bx + 1] if bx + 1 < gw else -np.inf
            left = grid[by, bx - 1] if bx - 1 >= 0 else -np.inf
            x += 0.25 if right >= left else -0.25
        y = float(by)
        if gh > 1:
            down = grid[by + 1, bx] if by + 1 < gh else -np.inf
            up = grid[by - 1, bx] if by - 1 >= 0 else -np.inf
            y += 0.25 if down >= up else -0.25
        sx = transform[0, 0] * x + transform[0, 1] * y + transform[0, 2]
        sy = transform[1, 0] * x + transform[1, 1] * y + transform[1, 2]
        flat = bool(np.all(grid == grid.max()))
        conf = 0.0 if flat else min(max(float(best), 0.0), 1.0)
        out.append((sx, sy, conf))
    return out


class TestDecodeRule:
    def test_impulse_quarter_shift(self):
        # Single impulse at column 10, row 12; flanking cells are all zero,
        # so both axes tie toward the positive neighbour.
        grid = np.zeros((24, 32))
        grid[12, 10] = 1.0
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.xy[0, 0] == pytest.approx(10.25)
        assert kp.xy[0, 1] == pytest.approx(12.25)
        assert kp.conf[0] == pytest.approx(1.0)

    def test_shift_toward_larger_neighbor(self):
        # Peak 5.0 at x=8, right neighbour 4.0, left neighbour 1.0.
        grid = np.zeros((16, 16))
        grid[8, 8] = 5.0
        grid[8, 9] = 4.0
        grid[8, 7] = 1.0
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.xy[0, 0] == pytest.approx(8.25)

    def test_shift_away_from_smaller_neighbor(self):
        grid = np.zeros((16, 16))
        grid[8, 8] = 5.0
        grid[8, 9] = 1.0
        grid[8, 7] = 4.0
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.xy[0, 0] == pytest.approx(7.75)

    def test_uniform_grid_flagged_zero_confidence(self):
        grid = np.full((8, 8), 0.7)
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.conf[0] == 0.0
        assert kp.xy[0, 0] == pytest.approx(0.25)  # argmax (0,0), tie shift
        assert kp.xy[0, 1] == pytest.approx(0.25)

    def test_edge_peak_shifts_inward(self):
        grid = np.zeros((8, 8))
        grid[0, 7] = 2.0
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.xy[0, 0] == pytest.approx(6.75)  # right edge, shift left
        assert kp.xy[0, 1] == pytest.approx(0.25)  # top edge, shift down

    def test_confidence_clamped(self):
        grid = np.zeros((8, 8))
        grid[3, 3] = 7.5
        kp = decode_heatmaps(Heatmaps(_grids(grid), IDENTITY))
        assert kp.conf[0] == 1.0

    def test_affine_transform_applied(self):
        grid = np.zeros((8, 8))
        grid[2, 4] = 1.0
        transform = np.array([[4.0, 0.0, 100.0], [0.0, 4.0, 50.0]])
        kp = decode_heatmaps(Heatmaps(_grids(grid), transform))
        assert kp.xy[0, 0] == pytest.approx(100.0 + 4.25 * 4.0)
        assert kp.xy[0, 1] == pytest.approx(50.0 + 2.25 * 4.0)

    def test_matches_reference_on_random_grids(self):
        rng = np.random.default_rng(33)
        for _ in range(25):
            maps = rng.random((NUM_KEYPOINTS, 12, 9))
            transform = np.array([[2.0, 0.0, float(rng.integers(0, 50))],
                                  [0.0, 3.0, float(rng.integers(0, 50))]])
            got = decode_heatmaps(Heatmaps(maps, transform))
            for k, (sx, sy, conf) in enumerate(reference_decode(maps, transform)):
                assert got.xy[k, 0] == sx
                assert got.xy[k, 1] == sy
                assert got.conf[k] == conf


class TestScalingInvariance:
    @given(st.integers(0, 2**32 - 1),
           st.sampled_from([0.25, 0.5, 2.0, 4.0, 8.0, 3.7, 0.013]))
    @settings(max_examples=60, deadline=None)
    def test_coordinates_unchanged(self, seed, factor):
        rng = np.random.default_rng(seed)
        maps = rng.random((NUM_KEYPOINTS, 10, 14)) + 0.01
        a = decode_heatmaps(Heatmaps(maps, IDENTITY))
        b = decode_heatmaps(Heatmaps(maps * factor, IDENTITY))
        assert np.array_equal(a.xy, b.xy)

    def test_coordinates_within_grid_mapped_bounds(self):
        rng = np.random.default_rng(41)
        transform = np.array([[3.0, 0.0, 10.0], [0.0, 2.0, 7.0]])
        for _ in range(50):
            maps = rng.random((NUM_KEYPOINTS, 6, 11))
            kp = decode_heatmaps(Heatmaps(maps, transform))
            assert (kp.xy[:, 0] >= 10.0).all() and (kp.xy[:, 0] <= 10.0 + 3.0 * 10).all()
            assert (kp.xy[:, 1] >= 7.0).all() and (kp.xy[:, 1] <= 7.0 + 2.0 * 5).all()


class TestValidation:
    def test_wrong_channel_count(self):
        with pytest.raises(ValueError):
            Heatmaps(np.zeros((5, 4, 4)), IDENTITY)

    def test_negative_activations_rejected(self):
        maps = np.zeros((NUM_KEYPOINTS, 4, 4))
        maps[0, 0, 0] = -1.0
        with pytest.raises(ValueError):
            Heatmaps(maps, IDENTITY)

    def test_singular_transform_rejected(self):
        with pytest.raises(ValueError):
            Heatmaps(np.zeros((NUM_KEYPOINTS, 4, 4)),
                     np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
