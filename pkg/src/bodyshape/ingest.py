"""Image decoding, height validation, and the evaluation-dataset manifest.

The manifest is a UTF-8 CSV with header
``image,height_cm,shape,bust_cm,waist_cm,hip_cm,sex``. Shape labels use
the exact spellings Rectangle|Triangle|InvertedTriangle|Spoon|Hourglass;
ground-truth measurements are optional but all-or-nothing per row. Image
paths resolve relative to the manifest's directory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageOps, UnidentifiedImageError

from bodyshape.classifier import BodyShape
from bodyshape.errors import (
    HeightOutOfRange,
    ImageTooSmall,
    MalformedManifest,
    UnreadableFile,
    UnsupportedFormat,
)

MIN_DIMENSION = 64
HEIGHT_MIN_CM = 100.0
HEIGHT_MAX_CM = 230.0

_MANIFEST_COLUMNS = ("image", "height_cm", "shape", "bust_cm", "waist_cm", "hip_cm", "sex")
_SEXES = ("male", "female")
_DECODABLE_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True)
class HeightCm:
    value: float


@dataclass
class RgbImage:
    """Decoded raster, row-major 8-bit RGB, orientation already applied."""

    pixels: np.ndarray
    source: Path | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValueError("pixels must be (H, W, 3) uint8")
        if px.shape[0] < MIN_DIMENSION or px.shape[1] < MIN_DIMENSION:
            raise ImageTooSmall(
                f"image is {px.shape[1]}x{px.shape[0]}, minimum is "
                f"{MIN_DIMENSION}x{MIN_DIMENSION}"
            )
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SubjectRecord:
    image_path: Path
    height: HeightCm
    true_shape: BodyShape | None = None
    true_bust: float | None = None
    true_waist: float | None = None
    true_hip: float | None = None
    sex: str | None = None

    def __post_init__(self):
        present = [v is not None for v in (self.true_bust, self.true_waist, self.true_hip)]
        if any(present) and not all(present):
            raise ValueError("ground-truth measurements are all-or-nothing")
        if self.sex is not None and self.sex not in _SEXES:
            raise ValueError(f"sex must be one of {_SEXES}, got {self.sex!r}")

    @property
    def has_measurements(self) -> bool:
        return self.true_bust is not None


def validate_height(raw: float) -> HeightCm:
    """Accept a height in centimetres, rejecting probable unit mix-ups."""
    raw = float(raw)
    if not np.isfinite(raw):
        raise HeightOutOfRange(f"height must be finite, got {raw}")
    if not HEIGHT_MIN_CM <= raw <= HEIGHT_MAX_CM:
        raise HeightOutOfRange(
            f"height {raw} cm outside [{HEIGHT_MIN_CM:g}, {HEIGHT_MAX_CM:g}]; "
            "height must be given in centimetres"
        )
    return HeightCm(raw)


def load_image(path: str | Path) -> RgbImage:
    """Decode a PNG or JPEG, applying EXIF orientation so heads point up."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            fmt = img.format
            if fmt not in _DECODABLE_FORMATS:
                raise UnsupportedFormat(f"{path}: format {fmt!r} is not PNG or JPEG")
            img = ImageOps.exif_transpose(img)
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a decodable image") from exc
    except FileNotFoundError as exc:
        raise UnreadableFile(f"{path}: file not found") from exc
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    return RgbImage(pixels, source=path)


def _parse_float(raw: str, row_num: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise MalformedManifest(
            f"row {row_num}: column {column!r} has unparsable number {raw!r}"
        ) from exc


def read_dataset_manifest(path: str | Path) -> list[SubjectRecord]:
    """Parse the evaluation manifest into subject records."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc

    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    missing = [c for c in _MANIFEST_COLUMNS if c not in header]
    if missing:
        raise MalformedManifest(f"{path}: missing required columns {missing}")

    records: list[SubjectRecord] = []
    for row_num, row in enumerate(reader, start=2):
        image = (row["image"] or "").strip()
        if not image:
            raise MalformedManifest(f"row {row_num}: empty image path")
        image_path = Path(image)
        if not image_path.is_absolute():
            image_path = path.parent / image_path

        try:
            height = validate_height(_parse_float(row["height_cm"], row_num, "height_cm"))
        except HeightOutOfRange as exc:
            raise MalformedManifest(f"row {row_num}: {exc}") from exc
        except TypeError as exc:
            raise MalformedManifest(f"row {row_num}: missing height_cm") from exc

        shape_raw = (row["shape"] or "").strip()
        if shape_raw:
            try:
                shape = BodyShape.from_label(shape_raw)
            except ValueError as exc:
                raise MalformedManifest(f"row {row_num}: {exc}") from exc
        else:
            shape = None

        cms: dict[str, float | None] = {}
        for column in ("bust_cm", "waist_cm", "hip_cm"):
            raw = (row[column] or "").strip()
            if raw:
                value = _parse_float(raw, row_num, column)
                if value <= 0:
                    raise MalformedManifest(
                        f"row {row_num}: column {column!r} must be positive, got {value}"
                    )
                cms[column] = value
            else:
                cms[column] = None

        sex_raw = (row["sex"] or "").strip().lower() or None
        if sex_raw is not None and sex_raw not in _SEXES:
            raise MalformedManifest(f"row {row_num}: unknown sex {sex_raw!r}")

        try:
            records.append(
                SubjectRecord(
                    image_path=image_path,
                    height=HeightCm(height.value),
                    true_shape=shape,
                    true_bust=cms["bust_cm"],
                    true_waist=cms["waist_cm"],
                    true_hip=cms["hip_cm"],
                    sex=sex_raw,
                )
            )
        except ValueError as exc:
            raise MalformedManifest(f"row {row_num}: {exc}") from exc
    return records


def write_manifest(records: list[SubjectRecord], path: str | Path) -> Path:
    """Write records back out in manifest format (fixture generation, tests).

    Image paths are written relative to the manifest directory when
    possible so the directory stays relocatable.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_MANIFEST_COLUMNS)
        for rec in records:
            try:
                image = rec.image_path.relative_to(path.parent)
            except ValueError:
                image = rec.image_path
            writer.writerow(
                [
                    str(image),
                    repr(rec.height.value),
                    rec.true_shape.value if rec.true_shape else "",
                    "" if rec.true_bust is None else repr(rec.true_bust),
                    "" if rec.true_waist is None else repr(rec.true_waist),
                    "" if rec.true_hip is None else repr(rec.true_hip),
                    rec.sex or "",
                ]
            )
    return path
