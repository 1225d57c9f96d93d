"""
Pairwise Direction Histogram

Every unordered pair of object points votes for the BEV direction of the
line joining them. Directions are folded into [0, pi) and measured in the
yaw convention of the geometry module, so a line along a box's length axis
votes for the box's theta_y.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..pointcloud import ObjectPoints
from ..utils.errors import OrientationError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_BIN_WIDTH = math.pi / 90.0

# Pairs closer than this have no direction
MIN_PAIR_DISTANCE = 1e-6


class DirectionHistogram(BaseModel):
    """
    Vote counts over [0, pi).

    Attributes:
        bin_width: radians per bin
        counts: per-bin tallies
        mode_angle: center of the max-count bin (smallest angle on ties)
        n_pairs: pairs that voted
        n_skipped: degenerate pairs that did not vote
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bin_width: float = Field(gt=0)
    counts: np.ndarray
    mode_angle: float = Field(ge=0, lt=math.pi)
    n_pairs: int = Field(ge=0)
    n_skipped: int = Field(ge=0)

    @property
    def n_bins(self) -> int:
        return int(len(self.counts))

    def bin_of(self, angle: float) -> int:
        """Index of the bin holding a direction (folded into [0, pi) first)."""
        return int(_bin_index(np.array([fold_direction(angle)]), self.bin_width, self.n_bins)[0])


def n_bins_for(bin_width: float) -> int:
    n = int(round(math.pi / bin_width))
    if n < 1:
        raise ValueError(f"bin width {bin_width} is wider than pi")
    return n


def fold_direction(angle: float) -> float:
    """Map any angle onto [0, pi)."""
    folded = math.fmod(angle, math.pi)
    if folded < 0:
        folded += math.pi
    if folded >= math.pi:
        folded = 0.0
    return folded


def _bin_index(angles: np.ndarray, bin_width: float, n_bins: int) -> np.ndarray:
    idx = np.floor(angles / bin_width).astype(np.int64)
    return np.clip(idx, 0, n_bins - 1)


def pair_directions(bev: np.ndarray) -> np.ndarray:
    """
    Folded directions of all non-degenerate unordered point pairs.

    Args:
        bev: (M, 2) BEV points

    Returns:
        (K,) angles in [0, pi)
    """
    bev = np.asarray(bev, dtype=float).reshape(-1, 2)
    i, j = np.triu_indices(len(bev), k=1)
    delta = bev[j] - bev[i]
    keep = np.hypot(delta[:, 0], delta[:, 1]) > MIN_PAIR_DISTANCE
    delta = delta[keep]
    # yaw convention: the length axis (cos t, -sin t) maps to angle t
    angles = np.mod(np.arctan2(-delta[:, 1], delta[:, 0]), math.pi)
    angles[angles >= math.pi] = 0.0
    return angles


def pairwise_direction_histogram(
    pts: ObjectPoints,
    bin_width: Optional[float] = None
) -> DirectionHistogram:
    """
    Histogram the directions of all point pairs.

    Args:
        pts: object points (M >= 2)
        bin_width: bin width in radians, pi/90 by default

    Returns:
        DirectionHistogram

    Raises:
        OrientationError: fewer than two points, or every pair is degenerate
    """
    bin_width = DEFAULT_BIN_WIDTH if bin_width is None else float(bin_width)
    n_bins = n_bins_for(bin_width)
    if pts.M < 2:
        raise OrientationError(f"need at least 2 points, got {pts.M}")

    angles = pair_directions(pts.bev)
    total = pts.M * (pts.M - 1) // 2
    if angles.size == 0:
        raise OrientationError(f"all {total} point pairs are degenerate")

    counts = np.bincount(_bin_index(angles, bin_width, n_bins), minlength=n_bins)
    best = int(np.argmax(counts))
    mode = min((best + 0.5) * bin_width, math.pi - 1e-12)
    logger.debug(f"direction histogram: {angles.size} pairs, mode bin {best} ({math.degrees(mode):.1f} deg)")

    return DirectionHistogram(
        bin_width=bin_width,
        counts=counts,
        mode_angle=mode,
        n_pairs=int(angles.size),
        n_skipped=int(total - angles.size),
    )
