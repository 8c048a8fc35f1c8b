"""Config-file loading for the pipeline knobs.

JSON with optional sections, unknown keys rejected::

    {
      "anthro": {"bust_fraction": 0.31, "convention": "est_circumference", ...},
      "classifier": {"t_shape_diff": 9.14, "width_factor": 0.4, ...},
      "tau_kp": 0.3,
      "opening": false
    }
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from bodyshape.anthropometry import AnthroConfig
from bodyshape.classifier import ClassifierConfig
from bodyshape.errors import InvalidConfig
from bodyshape.pipeline import PipelineConfig

_SECTIONS = {"anthro", "classifier", "tau_kp", "opening"}


def _build(cls, section: dict, name: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise InvalidConfig(f"unknown keys in {name!r} section: {sorted(unknown)}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad {name!r} section: {exc}") from exc


def load_pipeline_config(path: str | Path | None, convention: str | None = None) -> PipelineConfig:
    """Build a PipelineConfig from an optional JSON file.

    ``convention`` (from the CLI flag) overrides the anthro section's value.
    """
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig(f"config {path} must hold a JSON object")
        unknown = set(data) - _SECTIONS
        if unknown:
            raise InvalidConfig(f"unknown config sections: {sorted(unknown)}")

    anthro_section = dict(data.get("anthro", {}))
    if convention is not None:
        anthro_section["convention"] = convention
    anthro = _build(AnthroConfig, anthro_section, "anthro")
    classifier = _build(ClassifierConfig, dict(data.get("classifier", {})), "classifier")

    tau_kp = data.get("tau_kp", PipelineConfig().tau_kp)
    opening = data.get("opening", False)
    if not isinstance(tau_kp, (int, float)) or not 0.0 <= float(tau_kp) <= 1.0:
        raise InvalidConfig(f"tau_kp must be a number in [0, 1], got {tau_kp!r}")
    if not isinstance(opening, bool):
        raise InvalidConfig(f"opening must be a boolean, got {opening!r}")

    return PipelineConfig(anthro=anthro, classifier=classifier,
                          tau_kp=float(tau_kp), opening=opening)
