"""Five-class body-shape taxonomy over bust/waist/hip measurements.

Ordered threshold rules on pairwise differences, first match wins, with
Rectangle as the guaranteed fallback. Thresholds default to the classic
inch-derived values (1" = 2.54 cm and so on) used by circumference-based
shape charts; when measurements are frontal widths rather than estimated
circumferences the thresholds are scaled by ``width_factor``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields

from bodyshape.errors import NonPositiveMeasurement


class BodyShape(enum.Enum):
    RECTANGLE = "Rectangle"
    TRIANGLE = "Triangle"
    INVERTED_TRIANGLE = "InvertedTriangle"
    SPOON = "Spoon"
    HOURGLASS = "Hourglass"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "BodyShape":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown body shape label {label!r}")


# Canonical ordering for confusion matrices and histograms.
CLASS_ORDER = (
    BodyShape.RECTANGLE,
    BodyShape.TRIANGLE,
    BodyShape.INVERTED_TRIANGLE,
    BodyShape.SPOON,
    BodyShape.HOURGLASS,
)


@dataclass(frozen=True)
class ClassifierConfig:
    """Rule thresholds in centimetres, on the circumference scale.

    ``width_factor`` rescales every threshold when the incoming
    measurements are frontal widths (a nominal circumference-to-width
    ratio of 2.5 gives the 0.40 default).
    """

    t_hourglass_bh: float = 2.54
    t_shape_diff: float = 9.14
    t_bw_drop: float = 22.86
    t_hw_drop: float = 25.40
    t_spoon_hb: float = 5.08
    t_spoon_hw: float = 17.78
    width_factor: float = 0.40

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")
        if self.t_spoon_hw >= self.t_hw_drop:
            raise ValueError("t_spoon_hw must be below t_hw_drop")
        if self.t_spoon_hb >= self.t_shape_diff:
            raise ValueError("t_spoon_hb must be below t_shape_diff")
        if self.width_factor > 1.0:
            raise ValueError("width_factor must be in (0, 1]")

    def thresholds(self, convention: str) -> tuple[float, float, float, float, float, float]:
        """Effective thresholds for the given measurement convention."""
        k = self.width_factor if convention == "frontal_width" else 1.0
        return (
            self.t_hourglass_bh * k,
            self.t_shape_diff * k,
            self.t_bw_drop * k,
            self.t_hw_drop * k,
            self.t_spoon_hb * k,
            self.t_spoon_hw * k,
        )


@dataclass(frozen=True)
class RuleCheck:
    rule: str
    passed: bool
    values: dict


@dataclass(frozen=True)
class RuleTrace:
    checks: tuple[RuleCheck, ...]
    shape: BodyShape


def classify_values(bust: float, waist: float, hip: float,
                    thresholds: tuple[float, ...]) -> BodyShape:
    """Rule walk on raw centimetre values against pre-scaled thresholds.

    Fast path used by the grid tests; :func:`classify` is the public
    entry point.
    """
    t_hg_bh, t_diff, t_bw, t_hw, t_sp_hb, t_sp_hw = thresholds
    bh = bust - hip
    hb = hip - bust
    bw = bust - waist
    hw = hip - waist
    if bh <= t_hg_bh and hb < t_diff and (bw >= t_bw or hw >= t_hw):
        return BodyShape.HOURGLASS
    if hb > t_sp_hb and hw >= t_sp_hw:
        return BodyShape.SPOON
    if hb >= t_diff and hw < t_bw:
        return BodyShape.TRIANGLE
    if bh >= t_diff and bw < t_bw:
        return BodyShape.INVERTED_TRIANGLE
    return BodyShape.RECTANGLE


def _check_positive(bust: float, waist: float, hip: float) -> None:
    if not (bust > 0 and waist > 0 and hip > 0):
        raise NonPositiveMeasurement(
            f"measurements must be positive, got bust={bust} waist={waist} hip={hip}"
        )


def classify(measurements, cfg: ClassifierConfig | None = None) -> BodyShape:
    """Map a Measurements triple to one of the five shape classes."""
    cfg = cfg or ClassifierConfig()
    m = measurements
    _check_positive(m.bust, m.waist, m.hip)
    return classify_values(m.bust, m.waist, m.hip, cfg.thresholds(m.convention))


def rule_trace(measurements, cfg: ClassifierConfig | None = None) -> RuleTrace:
    """Like :func:`classify` but recording every rule evaluated.

    The trace stops at (and includes) the first passing rule; its final
    class always equals the classify output.
    """
    cfg = cfg or ClassifierConfig()
    m = measurements
    _check_positive(m.bust, m.waist, m.hip)
    t_hg_bh, t_diff, t_bw, t_hw, t_sp_hb, t_sp_hw = cfg.thresholds(m.convention)
    bh = m.bust - m.hip
    hb = m.hip - m.bust
    bw = m.bust - m.waist
    hw = m.hip - m.waist

    checks: list[RuleCheck] = []

    def step(rule: str, passed: bool, values: dict) -> bool:
        checks.append(RuleCheck(rule, passed, values))
        return passed

    if step(
        "hourglass",
        bh <= t_hg_bh and hb < t_diff and (bw >= t_bw or hw >= t_hw),
        {"bust_minus_hip": bh, "hip_minus_bust": hb, "bust_minus_waist": bw,
         "hip_minus_waist": hw, "t_hourglass_bh": t_hg_bh,
         "t_shape_diff": t_diff, "t_bw_drop": t_bw, "t_hw_drop": t_hw},
    ):
        shape = BodyShape.HOURGLASS
    elif step(
        "spoon",
        hb > t_sp_hb and hw >= t_sp_hw,
        {"hip_minus_bust": hb, "hip_minus_waist": hw,
         "t_spoon_hb": t_sp_hb, "t_spoon_hw": t_sp_hw},
    ):
        shape = BodyShape.SPOON
    elif step(
        "triangle",
        hb >= t_diff and hw < t_bw,
        {"hip_minus_bust": hb, "hip_minus_waist": hw,
         "t_shape_diff": t_diff, "t_bw_drop": t_bw},
    ):
        shape = BodyShape.TRIANGLE
    elif step(
        "inverted_triangle",
        bh >= t_diff and bw < t_bw,
        {"bust_minus_hip": bh, "bust_minus_waist": bw,
         "t_shape_diff": t_diff, "t_bw_drop": t_bw},
    ):
        shape = BodyShape.INVERTED_TRIANGLE
    else:
        step("rectangle", True, {})
        shape = BodyShape.RECTANGLE

    return RuleTrace(tuple(checks), shape)
