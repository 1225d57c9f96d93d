"""
Object-LiDAR-point extraction settings.
"""

from pydantic import BaseModel, ConfigDict, Field


class ExtractionConfig(BaseModel):
    """
    Parameters of the ground-removal / frustum / clustering / sampling chain.

    Attributes:
        min_depth: camera-frame depth below which points are dropped (m)
        ransac_threshold: inlier distance to the ground plane (m)
        ransac_iters: number of 3-point hypotheses
        ransac_min_points: minimum candidates for a plane fit
        ransac_min_inlier_ratio: below this the fit is rejected
        fallback_ground_height: camera-frame y of the ground when RANSAC fails (m)
        eps: DBSCAN neighborhood radius (m)
        min_pts: DBSCAN core-point neighbor count
        min_object_points: smallest acceptable dominant cluster
        n_sample: number of object points after sampling
        R: density radius (m)
    """

    model_config = ConfigDict(frozen=True)

    min_depth: float = Field(default=0.1, ge=0)
    ransac_threshold: float = Field(default=0.2, gt=0)
    ransac_iters: int = Field(default=200, ge=1)
    ransac_min_points: int = Field(default=50, ge=3)
    ransac_min_inlier_ratio: float = Field(default=0.2, ge=0, le=1)
    fallback_ground_height: float = Field(default=1.65)
    eps: float = Field(default=0.6, gt=0)
    min_pts: int = Field(default=4, ge=1)
    min_object_points: int = Field(default=15, ge=1)
    n_sample: int = Field(default=100, ge=1)
    R: float = Field(default=0.4, gt=0)
