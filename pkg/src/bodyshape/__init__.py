"""Single-image human body-shape classification toolkit."""

__version__ = "0.1.0"

from bodyshape.anthropometry import (
    AnthroConfig,
    BodyLines,
    Measurements,
    PxToCm,
    ellipse_circumference,
    locate_lines,
    measure,
    px_to_cm,
)
from bodyshape.classifier import (
    BodyShape,
    ClassifierConfig,
    RuleTrace,
    classify,
    rule_trace,
)
from bodyshape.evaluation import EvalReport, check_pair, error_table, evaluate
from bodyshape.inference import (
    BoundingBox,
    InferenceBackend,
    KeypointSet,
    LabelMap,
    OnnxBackend,
    ReplayBackend,
    StaticBackend,
    decode_heatmaps,
)
from bodyshape.ingest import (
    HeightCm,
    RgbImage,
    SubjectRecord,
    load_image,
    read_dataset_manifest,
    validate_height,
)
from bodyshape.pipeline import PipelineConfig, PipelineResult, run_pipeline
from bodyshape.silhouette import (
    BinaryMask,
    RowSpan,
    binarize_person,
    central_row_span,
    clean_mask,
    fill_holes,
    largest_component,
    mask_height_px,
)
from bodyshape.synth import SynthParams, make_preset, synth_silhouette

__all__ = [
    "AnthroConfig",
    "BinaryMask",
    "BodyLines",
    "BodyShape",
    "BoundingBox",
    "ClassifierConfig",
    "EvalReport",
    "HeightCm",
    "InferenceBackend",
    "KeypointSet",
    "LabelMap",
    "Measurements",
    "OnnxBackend",
    "PipelineConfig",
    "PipelineResult",
    "PxToCm",
    "ReplayBackend",
    "RgbImage",
    "RowSpan",
    "RuleTrace",
    "StaticBackend",
    "SubjectRecord",
    "SynthParams",
    "binarize_person",
    "central_row_span",
    "check_pair",
    "classify",
    "clean_mask",
    "decode_heatmaps",
    "ellipse_circumference",
    "error_table",
    "evaluate",
    "fill_holes",
    "largest_component",
    "load_image",
    "locate_lines",
    "make_preset",
    "mask_height_px",
    "measure",
    "px_to_cm",
    "read_dataset_manifest",
    "rule_trace",
    "run_pipeline",
    "synth_silhouette",
    "validate_height",
]
