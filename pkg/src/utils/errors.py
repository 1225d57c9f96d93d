"""
Exception hierarchy shared by every module.

Per-object failures carry a machine-readable reason code so batch drivers
can record them as skip records instead of aborting a frame.
"""

from typing import Optional

# Skip reason codes recorded in run manifests
REASON_EMPTY_FRUSTUM = "empty-frustum"
REASON_ALL_NOISE = "all-noise"
REASON_TOO_FEW_POINTS = "too-few-points"
REASON_NO_DIMS = "no-dims"
REASON_DEGENERATE_ORIENTATION = "degenerate-orientation"
REASON_BAD_DETECTION = "bad-detection"
REASON_NO_POINTS = "no-points"


class WeakBoxError(Exception):
    """Base class for all library errors."""


class ConfigError(WeakBoxError):
    """Invalid or inconsistent configuration."""


class KittiFormatError(WeakBoxError):
    """Malformed KITTI-format file."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class GroundPlaneError(WeakBoxError):
    """RANSAC could not find a ground plane."""


class FitError(WeakBoxError):
    """An object could not be turned into a pseudo-label."""

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(f"[{reason}] {message}" if message else reason)


class ClusteringError(FitError):
    """DBSCAN left no usable cluster."""


class OrientationError(FitError):
    """The pairwise-direction histogram is empty."""

    def __init__(self, message: str = ""):
        super().__init__(REASON_DEGENERATE_ORIENTATION, message)

