"""Exception taxonomy shared by the whole pipeline.

Every domain failure derives from :class:`BodyShapeError` and carries the
CLI exit code for its category: 2 for bad inputs, 3 for images where the
geometric analysis cannot proceed (no person, bad pose, degenerate mask),
4 for inference-backend failures. Exit code 1 is reserved for command-line
usage errors and never raised from here.
"""


class BodyShapeError(Exception):
    """Base class for all domain errors."""

    exit_code = 2


# -- input errors (exit 2) -------------------------------------------------

class UnreadableFile(BodyShapeError):
    """File is missing or cannot be read."""


class UnsupportedFormat(BodyShapeError):
    """File is not a decodable PNG or JPEG raster."""


class ImageTooSmall(BodyShapeError):
    """Either image dimension is below the 64 px minimum."""


class HeightOutOfRange(BodyShapeError):
    """Height outside [100, 230] cm, usually a unit mix-up (metres, inches)."""


class MalformedManifest(BodyShapeError):
    """Dataset manifest has a missing column, bad number, or unknown label."""


class EmptyDataset(BodyShapeError):
    """Evaluation requested over zero records."""


class InfeasibleParams(BodyShapeError):
    """Synthetic-silhouette parameters cannot produce a valid oracle body."""


class InvalidConfig(BodyShapeError):
    """Configuration file or value violates a documented constraint."""


# -- analysis errors (exit 3) ----------------------------------------------

class AnalysisError(BodyShapeError):
    """Image was readable but the person geometry could not be measured."""

    exit_code = 3


class NoPersonDetected(AnalysisError):
    """Segmentation produced zero person-class pixels."""


class EmptyMask(AnalysisError):
    """A mask operation requires at least one foreground pixel."""


class EmptyRow(AnalysisError):
    """Requested row has no foreground pixels or lies outside the mask."""


class LowConfidencePose(AnalysisError):
    """A shoulder or hip keypoint fell below the confidence threshold."""


class UpsideDown(AnalysisError):
    """Hip keypoints above shoulder keypoints; subject not upright."""


class LineOutsideMask(AnalysisError):
    """A computed measurement row does not intersect the silhouette."""


class NonPositiveMeasurement(AnalysisError):
    """Bust/waist/hip values must all be positive."""


class NoMeasurementGroundTruth(AnalysisError):
    """Error table requested but no record carries tape measurements."""


# -- backend errors (exit 4) -----------------------------------------------

class BackendFailure(BodyShapeError):
    """Model file missing or corrupt, runtime unavailable, or inference failed."""

    exit_code = 4
