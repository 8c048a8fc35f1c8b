"""Measurement-line overlay rendering for debugging and reports."""

from __future__ import annotations

from pathlib import Path

from PIL import Image, ImageDraw

from bodyshape.ingest import RgbImage
from bodyshape.pipeline import PipelineResult

_LINE_COLORS = {"bust": (235, 87, 87), "waist": (242, 153, 74), "hip": (47, 128, 237)}


def render_overlay(image: RgbImage, result: PipelineResult) -> Image.Image:
    """Draw the three measurement lines with their centimetre labels.

    Pure rendering; never feeds back into classification.
    """
    img = Image.fromarray(image.pixels.copy())
    draw = ImageDraw.Draw(img)
    m = result.measurements
    rows = {
        "bust": (result.lines.bust, m.bust),
        "waist": (result.lines.waist, m.waist),
        "hip": (result.lines.hip, m.hip),
    }
    for name, (span, value) in rows.items():
        color = _LINE_COLORS[name]
        draw.line([(span.left, span.row), (span.right, span.row)], fill=color, width=3)
        label = f"{name}: {value:.1f} cm"
        tx = min(span.right + 6, image.width - 80)
        ty = max(span.row - 7, 0)
        draw.text((tx, ty), label, fill=color)
    draw.text(
        (8, 8),
        f"shape: {result.shape.value}",
        fill=(20, 20, 20),
    )
    return img


def save_overlay(image: RgbImage, result: PipelineResult, path: str | Path) -> Path:
    path = Path(path)
    render_overlay(image, result).save(path)
    return path
