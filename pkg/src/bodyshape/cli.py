"""Command-line surface: classify one image, evaluate a dataset, or
generate synthetic fixture bodies.

Exit codes: 0 success, 1 usage error, 2 bad input (file, manifest,
config), 3 analysis failure (no person, low-confidence pose, degenerate
mask), 4 inference-backend failure.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
from PIL import Image

from bodyshape import __version__, coco
from bodyshape.classifier import BodyShape
from bodyshape.config import load_pipeline_config
from bodyshape.errors import BodyShapeError, InfeasibleParams
from bodyshape.evaluation import confusion_table, error_table, evaluate
from bodyshape.inference import OnnxBackend, ReplayBackend, save_fixture
from bodyshape.ingest import (
    HeightCm,
    SubjectRecord,
    load_image,
    read_dataset_manifest,
    validate_height,
    write_manifest,
)
from bodyshape.overlay import save_overlay
from bodyshape.pipeline import make_record_runner, run_pipeline
from bodyshape.synth import PRESETS, SynthParams, make_preset, synth_silhouette

_CONVENTIONS = ("frontal_width", "est_circumference")


def _make_backend(models: str | None, replay: str | None):
    if (models is None) == (replay is None):
        raise click.UsageError("exactly one of --models or --replay is required")
    if models is not None:
        backend = OnnxBackend(models)
        info = {
            "segmentation_sha256": backend.checksums["segmentation"],
            "keypoints_sha256": backend.checksums["keypoints"],
        }
        return backend, info
    return ReplayBackend(replay), {"replay": str(replay)}


def _classify_payload(result, models_info: dict) -> dict:
    lines = {
        name: {
            "row": span.row,
            "left": span.left,
            "right": span.right,
            "width_px": span.width_px,
        }
        for name, span in (
            ("bust", result.lines.bust),
            ("waist", result.lines.waist),
            ("hip", result.lines.hip),
        )
    }
    return {
        "shape": result.shape.value,
        "convention": result.measurements.convention,
        "measurements_cm": {
            "bust": result.measurements.bust,
            "waist": result.measurements.waist,
            "hip": result.measurements.hip,
        },
        "lines": lines,
        "scale_cm_per_px": result.scale.scale,
        "mask_height_px": result.mask_height_px,
        "keypoint_confidences": {
            name: float(result.keypoints.conf[i])
            for i, name in enumerate(coco.KEYPOINT_NAMES)
        },
        "rule_trace": [
            {"rule": c.rule, "passed": c.passed, "values": c.values}
            for c in result.trace.checks
        ],
        "models": models_info,
        "version": __version__,
    }


def _emit_json(payload: dict, json_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    click.echo(text)
    if json_path:
        Path(json_path).write_text(text + "\n", encoding="utf-8")


@click.group(name="bodyshape")
@click.version_option(version=__version__)
def cli():
    """Classify human body shape from a single photo plus height."""


@cli.command("classify")
@click.argument("image_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--height-cm", type=float, required=True, help="Subject height in centimetres.")
@click.option("--models", type=click.Path(exists=True, dir_okay=False),
              help="JSON model manifest for the ONNX backend.")
@click.option("--replay", type=click.Path(exists=True, file_okay=False),
              help="Replay-fixture directory.")
@click.option("--convention", type=click.Choice(_CONVENTIONS), default=None,
              help="Measurement convention; overrides the config file.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Pipeline config JSON.")
@click.option("--overlay", "overlay_path", type=click.Path(dir_okay=False),
              help="Write a measurement-line overlay PNG here.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False),
              help="Also write the result JSON here.")
def cmd_classify(image_path, height_cm, models, replay, convention, config_path,
                 overlay_path, json_path):
    """Classify one image and print the result JSON."""
    backend, models_info = _make_backend(models, replay)
    cfg = load_pipeline_config(config_path, convention)
    try:
        image = load_image(image_path)
        height = validate_height(height_cm)
        result = run_pipeline(image, height, backend, cfg)
    except BodyShapeError as exc:
        _emit_json(
            {
                "error": {"type": type(exc).__name__, "message": str(exc)},
                "version": __version__,
            },
            json_path,
        )
        raise
    _emit_json(_classify_payload(result, models_info), json_path)
    if overlay_path:
        save_overlay(image, result, overlay_path)


@cli.command("evaluate")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--models", type=click.Path(exists=True, dir_okay=False))
@click.option("--replay", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--convention", type=click.Choice(_CONVENTIONS), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Write the report JSON here.")
@click.option("--table", is_flag=True, help="Print the error and confusion tables.")
@click.option("--workers", type=int, default=1, show_default=True)
def cmd_evaluate(manifest_path, models, replay, config_path, convention, out_path,
                 table, workers):
    """Evaluate a dataset manifest and report accuracy and error stats."""
    backend, _ = _make_backend(models, replay)
    cfg = load_pipeline_config(config_path, convention)
    records = read_dataset_manifest(manifest_path)
    report = evaluate(records, make_record_runner(backend, cfg), workers=workers)
    text = report.to_json()
    click.echo(text)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    if table:
        click.echo("")
        click.echo(error_table(report))
        click.echo("")
        click.echo(confusion_table(report))


@cli.command("synth")
@click.option("--preset", type=click.Choice(sorted(PRESETS) + ["mixed"]),
              help="Named body preset, or 'mixed' to cycle all five.")
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON file with explicit synthetic-body parameters.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_synth(preset, params_path, out_dir, count, seed):
    """Generate synthetic subjects: images, replay fixtures, and a manifest."""
    if (preset is None) == (params_path is None):
        raise click.UsageError("exactly one of --preset or --params is required")
    out = Path(out_dir)
    fixtures = out / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    fixtures.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    if params_path is not None:
        raw = json.loads(Path(params_path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise InfeasibleParams(f"{params_path} must hold a JSON object")
        try:
            params = SynthParams(**raw)
        except TypeError as exc:
            raise InfeasibleParams(f"bad synth params: {exc}") from exc

    names = sorted(PRESETS)
    records: list[SubjectRecord] = []
    for i in range(count):
        if params_path is not None:
            result = synth_silhouette(params)
        elif preset == "mixed":
            result = make_preset(names[i % len(names)], rng)
        else:
            result = make_preset(preset, rng)
        stem = f"p{i:03d}"
        Image.fromarray(result.render()).save(out / f"{stem}.png")
        save_fixture(fixtures / stem, result.label_map(), result.keypoints)
        records.append(
            SubjectRecord(
                image_path=out / f"{stem}.png",
                height=HeightCm(result.params.height_cm),
                true_shape=result.shape,
                true_bust=result.measurements.bust,
                true_waist=result.measurements.waist,
                true_hip=result.measurements.hip,
            )
        )
    manifest = write_manifest(records, out / "manifest.csv")
    click.echo(f"wrote {count} subjects under {out} (manifest: {manifest})")


def main(argv=None) -> int:
    """Console entry point with the documented exit-code taxonomy."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except BodyShapeError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return exc.exit_code
    return 0
