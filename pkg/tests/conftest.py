import numpy as np
import pytest

from bodyshape.ingest import RgbImage
from bodyshape.synth import make_preset


@pytest.fixture(scope="session")
def hourglass():
    return make_preset("hourglass")


@pytest.fixture(scope="session")
def all_presets():
    return {name: make_preset(name) for name in
            ("rectangle", "triangle", "inverted_triangle", "spoon", "hourglass")}


def random_blob_mask(rng: np.random.Generator, h: int = 64, w: int = 96) -> np.ndarray:
    """A connected-ish random mask: a few overlapping rectangles."""
    mask = np.zeros((h, w), dtype=bool)
    cy, cx = h // 2, w // 2
    for _ in range(rng.integers(2, 6)):
        bh = int(rng.integers(h // 4, h // 2))
        bw = int(rng.integers(w // 4, w // 2))
        top = int(np.clip(cy + rng.integers(-h // 4, h // 4) - bh // 2, 0, h - bh))
        left = int(np.clip(cx + rng.integers(-w // 4, w // 4) - bw // 2, 0, w - bw))
        mask[top:top + bh, left:left + bw] = True
    return mask


def image_from_mask(mask: np.ndarray) -> RgbImage:
    gray = np.where(mask, 70, 205).astype(np.uint8)
    return RgbImage(np.repeat(gray[:, :, np.newaxis], 3, axis=2))
