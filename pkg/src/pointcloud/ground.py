"""
Ground Plane Estimation

RANSAC over random 3-point hypotheses followed by a least-squares refit on
the inliers. Planes are stored as n . p + d = 0 with the unit normal
pointing up (negative camera-y component).
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .config import ExtractionConfig
from ..utils.errors import GroundPlaneError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class GroundPlane(BaseModel):
    """A plane n . p + d = 0 in the camera frame with an upward unit normal."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    normal: np.ndarray
    d: float
    inlier_ratio: float = 1.0

    @field_validator("normal", mode="before")
    @classmethod
    def _unit_up(cls, value) -> np.ndarray:
        n = np.asarray(value, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if norm <= 0:
            raise ValueError("plane normal must be non-zero")
        return n / norm

    @classmethod
    def horizontal(cls, height: float) -> "GroundPlane":
        """The plane y = height."""
        return cls(normal=np.array([0.0, -1.0, 0.0]), d=float(height))

    def height_above(self, points: np.ndarray) -> np.ndarray:
        """Signed distance of points above the plane (positive = above)."""
        return np.asarray(points, dtype=float) @ self.normal + self.d


def _orient_up(normal: np.ndarray, d: float):
    if normal[1] > 0:
        return -normal, -d
    return normal, d


def _refit(points: np.ndarray):
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    normal = vt[-1]
    normal = normal / np.linalg.norm(normal)
    return _orient_up(normal, -float(normal @ centroid))


def fit_ground_plane(
    points: np.ndarray,
    cfg: Optional[ExtractionConfig] = None,
    rng: Optional[np.random.Generator] = None
) -> GroundPlane:
    """
    Estimate the ground plane by RANSAC.

    Args:
        points: (N, 3) camera-frame points
        cfg: extraction settings (threshold, iterations, acceptance ratio)
        rng: random generator; a fixed default seed is used when omitted

    Returns:
        GroundPlane with an upward normal

    Raises:
        GroundPlaneError: too few points or best inlier ratio below the minimum
    """
    cfg = cfg or ExtractionConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < cfg.ransac_min_points:
        raise GroundPlaneError(f"need at least {cfg.ransac_min_points} points, got {n}")

    best_count = -1
    best_mask = None
    for _ in range(cfg.ransac_iters):
        sample = pts[rng.choice(n, 3, replace=False)]
        normal = np.cross(sample[1] - sample[0], sample[2] - sample[0])
        norm = np.linalg.norm(normal)
        if norm < 1e-9:
            continue
        normal = normal / norm
        d = -float(normal @ sample[0])
        mask = np.abs(pts @ normal + d) <= cfg.ransac_threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask

    if best_mask is None:
        raise GroundPlaneError("all RANSAC hypotheses were degenerate")

    ratio = best_count / n
    if ratio < cfg.ransac_min_inlier_ratio:
        raise GroundPlaneError(f"best inlier ratio {ratio:.3f} below {cfg.ransac_min_inlier_ratio}")

    normal, d = _refit(pts[best_mask])
    inliers = np.abs(pts @ normal + d) <= cfg.ransac_threshold
    logger.debug(f"Ground plane n={np.round(normal, 4).tolist()} d={d:.3f} inliers={int(inliers.sum())}/{n}")
    return GroundPlane(normal=normal, d=d, inlier_ratio=float(inliers.mean()))


def remove_ground(points: np.ndarray, plane: GroundPlane, cfg: Optional[ExtractionConfig] = None) -> np.ndarray:
    """
    Drop points within the RANSAC threshold of the plane or below it.

    Args:
        points: (N, 3) camera-frame points
        plane: fitted or fallback ground plane
        cfg: extraction settings

    Returns:
        (K, 3) points strictly more than ransac_threshold above the plane
    """
    cfg = cfg or ExtractionConfig()
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts.reshape(0, 3)
    return pts[plane.height_above(pts) > cfg.ransac_threshold]
