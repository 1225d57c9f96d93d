"""
Heuristic Orientation

Turns the histogram mode into a global yaw using the BEV x-extent of the
points: a wide footprint means the dominant direction is perpendicular to
the heading's normal, a narrow one means the mode already is the heading.
Also converts between global yaw and the observation angle.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry import Vec2BEV
from ..pointcloud import ObjectPoints
from .histogram import pairwise_direction_histogram

QUARTER_PI = math.pi / 4.0
HALF_PI = math.pi / 2.0

DEFAULT_OFFSET_THRESHOLD = 3.0


class OrientationEstimate(BaseModel):
    """
    Result of the orientation heuristic.

    Attributes:
        theta_y: global yaw in [0, pi)
        alpha_y: histogram mode moved into (pi/4, 3pi/4]
        d_x: BEV x extent of the points
        delta_y: observation angle relative to the points' centroid
    """

    model_config = ConfigDict(frozen=True)

    theta_y: float = Field(ge=0, lt=math.pi)
    alpha_y: float = Field(gt=QUARTER_PI, le=3 * QUARTER_PI)
    d_x: float = Field(ge=0)
    delta_y: float


def normalize_mode(alpha: float) -> float:
    """Shift a [0, pi) direction by pi/2 into (pi/4, 3pi/4]."""
    if alpha <= QUARTER_PI:
        return alpha + HALF_PI
    if alpha > 3 * QUARTER_PI:
        return alpha - HALF_PI
    return alpha


def heading_from_mode(alpha: float, d_x: float, C: float = DEFAULT_OFFSET_THRESHOLD) -> float:
    """
    Decision rule from the normalized mode to the yaw.

    d_x > C: the object is seen broadside so theta = alpha -/+ pi/2
    (minus when alpha >= pi/2). Otherwise theta = alpha.
    """
    alpha = normalize_mode(alpha)
    if d_x > C:
        if alpha >= HALF_PI:
            return alpha - HALF_PI
        return alpha + HALF_PI
    return alpha


def local_to_global(delta_y: float, center: Vec2BEV) -> float:
    """theta_y = delta_y + atan2(x, z)."""
    return delta_y + math.atan2(center.x, center.z)


def global_to_local(theta_y: float, center: Vec2BEV) -> float:
    """delta_y = theta_y - atan2(x, z)."""
    return theta_y - math.atan2(center.x, center.z)


def estimate_orientation(
    pts: ObjectPoints,
    C: float = DEFAULT_OFFSET_THRESHOLD,
    bin_width: Optional[float] = None
) -> OrientationEstimate:
    """
    Estimate the global yaw of an object from its points.

    Args:
        pts: object points
        C: x-extent threshold in meters
        bin_width: histogram bin width in radians

    Returns:
        OrientationEstimate with theta_y in [0, pi)

    Raises:
        OrientationError: the histogram has no votes
    """
    hist = pairwise_direction_histogram(pts, bin_width)
    alpha = normalize_mode(hist.mode_angle)
    theta = heading_from_mode(alpha, pts.d_x, C)
    centroid = np.mean(pts.bev, axis=0)
    center = Vec2BEV(x=float(centroid[0]), z=float(centroid[1]))
    return OrientationEstimate(
        theta_y=theta,
        alpha_y=alpha,
        d_x=pts.d_x,
        delta_y=global_to_local(theta, center),
    )
