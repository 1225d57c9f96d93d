"""
Camera Model

Pinhole intrinsics plus the LiDAR -> rectified-camera extrinsic chain
(R0_rect composed with Tr_velo_to_cam), and the projections between them.
"""

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utils.logger import get_logger

logger = get_logger(__name__)


class RawScan(BaseModel):
    """A raw LiDAR sweep: (N, 4) array of x, y, z, reflectance in the LiDAR frame."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _check_points(cls, value) -> np.ndarray:
        arr = np.asarray(value, dtype=np.float64)
        if arr.size == 0:
            return np.empty((0, 4))
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"scan must be (N, 4), got {arr.shape}")
        if not np.all(np.isfinite(arr[:, :3])):
            raise ValueError("scan contains non-finite coordinates")
        return arr

    def __len__(self) -> int:
        return int(self.points.shape[0])


class CameraModel(BaseModel):
    """
    Rectified pinhole camera with its LiDAR extrinsic.

    Attributes:
        f_x, f_y: focal lengths in pixels
        c_x, c_y: principal point in pixels
        extrinsic: 4x4 LiDAR -> rectified camera transform
        image_size: (width, height) in pixels
        projection: optional full 3x4 P2 matrix kept for calibration round-trips
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f_x: float = Field(gt=0)
    f_y: float = Field(gt=0)
    c_x: float
    c_y: float
    extrinsic: np.ndarray = Field(default_factory=lambda: np.eye(4))
    image_size: Tuple[int, int] = (1242, 375)
    projection: Optional[np.ndarray] = None

    @field_validator("extrinsic", mode="before")
    @classmethod
    def _check_extrinsic(cls, value) -> np.ndarray:
        arr = np.asarray(value, dtype=np.float64)
        if arr.shape != (4, 4):
            raise ValueError(f"extrinsic must be 4x4, got {arr.shape}")
        rot = arr[:3, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
            raise ValueError("extrinsic rotation part is not orthonormal")
        return arr

    @field_validator("projection", mode="before")
    @classmethod
    def _check_projection(cls, value) -> Optional[np.ndarray]:
        if value is None:
            return None
        arr = np.asarray(value, dtype=np.float64)
        if arr.shape != (3, 4):
            raise ValueError(f"projection must be 3x4, got {arr.shape}")
        return arr

    @property
    def intrinsic(self) -> np.ndarray:
        return np.array([
            [self.f_x, 0.0, self.c_x],
            [0.0, self.f_y, self.c_y],
            [0.0, 0.0, 1.0],
        ])

    def projection_matrix(self) -> np.ndarray:
        """The stored P2, or K with a zero translation column."""
        if self.projection is not None:
            return self.projection
        return np.hstack([self.intrinsic, np.zeros((3, 1))])

    @classmethod
    def from_kitti(cls, p2: np.ndarray, r0_rect: np.ndarray, tr_velo_to_cam: np.ndarray,
                   image_size: Tuple[int, int] = (1242, 375)) -> "CameraModel":
        """
        Build the model from KITTI calibration matrices.

        The translation column of P2 (stereo baseline) is kept for writing
        calibration files but not applied to projections.
        """
        r0 = np.eye(4)
        r0[:3, :3] = np.asarray(r0_rect, dtype=float).reshape(3, 3)
        tr = np.eye(4)
        tr[:3, :4] = np.asarray(tr_velo_to_cam, dtype=float).reshape(3, 4)
        p2 = np.asarray(p2, dtype=float).reshape(3, 4)
        return cls(
            f_x=p2[0, 0], f_y=p2[1, 1], c_x=p2[0, 2], c_y=p2[1, 2],
            extrinsic=r0 @ tr, image_size=image_size, projection=p2,
        )


def transform_to_camera(scan: RawScan, cam: CameraModel, min_depth: float = 0.1) -> np.ndarray:
    """
    Map LiDAR points to the rectified camera frame.

    Args:
        scan: raw LiDAR points
        cam: camera model holding the extrinsic
        min_depth: points with camera z <= min_depth are dropped

    Returns:
        (K, 3) camera-frame points
    """
    if len(scan) == 0:
        return np.empty((0, 3))
    homo = np.column_stack([scan.points[:, :3], np.ones(len(scan))])
    cam_pts = (homo @ cam.extrinsic.T)[:, :3]
    keep = cam_pts[:, 2] > min_depth
    logger.debug(f"transform_to_camera: kept {int(keep.sum())}/{len(scan)} points in front of the camera")
    return cam_pts[keep]


def project_points(points: np.ndarray, cam: CameraModel) -> np.ndarray:
    """Vectorized pinhole projection of (N, 3) points with z > 0 to (N, 2) pixels."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(pts[:, 2] <= 0):
        raise ValueError("cannot project points with z <= 0")
    u = cam.f_x * pts[:, 0] / pts[:, 2] + cam.c_x
    v = cam.f_y * pts[:, 1] / pts[:, 2] + cam.c_y
    return np.column_stack([u, v])


def project_to_image(p, cam: CameraModel) -> Tuple[float, float]:
    """
    Project one camera-frame point to pixels.

    Args:
        p: (x, y, z) with z > 0
        cam: camera model

    Returns:
        (u, v) pixel coordinates

    Raises:
        ValueError: if z <= 0
    """
    x, y, z = (float(c) for c in p)
    if z <= 0:
        raise ValueError(f"cannot project a point with z={z} <= 0")
    return cam.f_x * x / z + cam.c_x, cam.f_y * y / z + cam.c_y
