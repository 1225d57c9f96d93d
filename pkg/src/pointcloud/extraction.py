"""
Object-LiDAR-Points Extraction

Turns a raw scan plus per-frame 2D detections into per-object point sets:
ground removal -> frustum (box or mask) selection -> DBSCAN dominant
cluster -> median-height filter -> fixed-size sampling -> densities.
"""

import zlib
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.distance import cdist
from sklearn.cluster import DBSCAN

from .camera import CameraModel, RawScan, project_points, transform_to_camera
from .config import ExtractionConfig
from .ground import GroundPlane, fit_ground_plane, remove_ground
from ..utils.errors import (
    ClusteringError,
    GroundPlaneError,
    REASON_ALL_NOISE,
    REASON_BAD_DETECTION,
    REASON_EMPTY_FRUSTUM,
    REASON_TOO_FEW_POINTS,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

# smallest usable bbox side after clamping (pixels)
MIN_BBOX_SIDE = 1.0


class Detection2D(BaseModel):
    """
    One 2D detection used to select the object's frustum.

    Attributes:
        frame_id: frame identifier (KITTI index string)
        cls: category label
        score: detector confidence in [0, 1]
        bbox: (x1, y1, x2, y2) in pixels
        mask: optional (H, W) boolean instance mask, image-sized
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frame_id: str
    cls: str
    score: float = Field(default=1.0, ge=0, le=1)
    bbox: Tuple[float, float, float, float]
    mask: Optional[np.ndarray] = None

    @field_validator("mask", mode="before")
    @classmethod
    def _bool_mask(cls, value):
        if value is None:
            return None
        arr = np.asarray(value)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {arr.shape}")
        return arr.astype(bool)

    @model_validator(mode="after")
    def _ordered_bbox(self) -> "Detection2D":
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            raise ValueError(f"bbox must satisfy x1<x2 and y1<y2, got {self.bbox}")
        return self

    def clamped(self, image_size: Tuple[int, int]) -> "Detection2D":
        """Copy with the bbox clamped to [0, width-1] x [0, height-1]."""
        width, height = image_size
        x1, y1, x2, y2 = self.bbox
        box = (
            min(max(x1, 0.0), width - 1.0), min(max(y1, 0.0), height - 1.0),
            min(max(x2, 0.0), width - 1.0), min(max(y2, 0.0), height - 1.0),
        )
        return self.model_copy(update={"bbox": box})

    def problem(self, image_size: Tuple[int, int]) -> Optional[str]:
        """
        Why this detection cannot select a frustum, None when it can.

        Detections read leniently from a file may carry an inverted bbox or
        an out-of-range score; a valid bbox can still collapse when clamped
        to an image it lies outside of.
        """
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            return f"bbox must satisfy x1<x2 and y1<y2, got {self.bbox}"
        if not 0.0 <= self.score <= 1.0:
            return f"score must be in [0, 1], got {self.score}"
        cx1, cy1, cx2, cy2 = self.clamped(image_size).bbox
        if cx2 - cx1 < MIN_BBOX_SIDE or cy2 - cy1 < MIN_BBOX_SIDE:
            width, height = image_size
            return f"bbox {self.bbox} collapses when clamped to the {width}x{height} image"
        return None


class ObjectPoints(BaseModel):
    """
    Filtered LiDAR points of one object with cached BEV data.

    Attributes:
        pts3d: (M, 3) camera-frame points
        bev: (M, 2) cached (x, z)
        density: (M,) neighbor counts E_i within radius R (self included)
        R: radius the densities were computed with
        y_L: mean camera-frame y of pts3d
        d_x: BEV x extent (max - min)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pts3d: np.ndarray
    bev: np.ndarray
    density: np.ndarray
    R: float = Field(gt=0)
    y_L: float
    d_x: float = Field(ge=0)

    @property
    def M(self) -> int:
        return int(self.pts3d.shape[0])

    @classmethod
    def from_points(cls, pts3d: np.ndarray, R: float = 0.4) -> "ObjectPoints":
        """Build from camera-frame points, computing densities, y_L and d_x."""
        pts = np.asarray(pts3d, dtype=float).reshape(-1, 3)
        if len(pts) == 0:
            raise ValueError("ObjectPoints needs at least one point")
        bev = pts[:, [0, 2]].copy()
        return cls(
            pts3d=pts,
            bev=bev,
            density=compute_density(bev, R),
            R=R,
            y_L=float(np.mean(pts[:, 1])),
            d_x=float(np.ptp(bev[:, 0])),
        )

    @classmethod
    def from_bev(cls, bev: np.ndarray, y: float = 0.0, R: float = 0.4) -> "ObjectPoints":
        """Convenience constructor from BEV (x, z) points at a common height."""
        bev = np.asarray(bev, dtype=float).reshape(-1, 2)
        pts = np.column_stack([bev[:, 0], np.full(len(bev), y), bev[:, 1]])
        return cls.from_points(pts, R)

    def with_density(self, density: np.ndarray) -> "ObjectPoints":
        """Copy with caller-supplied densities (for balancing experiments)."""
        return self.model_copy(update={"density": np.asarray(density, dtype=float)})


class SkipRecord(BaseModel):
    """A detection that produced no pseudo-label, with the reason code."""

    model_config = ConfigDict(frozen=True)

    frame_id: str
    det_index: int
    cls: str
    reason: str
    message: str = ""


def compute_density(bev: np.ndarray, R: float) -> np.ndarray:
    """
    Count, for every point, the points within distance R (strict) including itself.

    Args:
        bev: (M, 2) BEV coordinates
        R: neighborhood radius in meters

    Returns:
        (M,) float array of counts, each >= 1
    """
    bev = np.asarray(bev, dtype=float).reshape(-1, 2)
    dist = cdist(bev, bev)
    return (dist < R).sum(axis=1).astype(float)


def select_frustum(points: np.ndarray, det: Detection2D, cam: CameraModel) -> np.ndarray:
    """
    Keep points whose image projection falls inside the detection.

    A mask, when present, takes precedence over the bbox.

    Args:
        points: (N, 3) camera-frame points, ground already removed
        det: the 2D detection
        cam: camera model

    Returns:
        (K, 3) initial object point cloud (possibly empty)
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    pts = pts[pts[:, 2] > 0]
    if len(pts) == 0:
        return pts
    uv = project_points(pts, cam)
    if det.mask is not None:
        height, width = det.mask.shape
        col = np.floor(uv[:, 0]).astype(np.int64)
        row = np.floor(uv[:, 1]).astype(np.int64)
        in_image = (col >= 0) & (col < width) & (row >= 0) & (row < height)
        keep = np.zeros(len(pts), dtype=bool)
        keep[in_image] = det.mask[row[in_image], col[in_image]]
    else:
        x1, y1, x2, y2 = det.bbox
        keep = (uv[:, 0] >= x1) & (uv[:, 0] <= x2) & (uv[:, 1] >= y1) & (uv[:, 1] <= y2)
    return pts[keep]


def cluster_select(initial: np.ndarray, cfg: Optional[ExtractionConfig] = None) -> np.ndarray:
    """
    Return the largest DBSCAN cluster of the initial object point cloud.

    Args:
        initial: (N, 3) non-empty camera-frame points
        cfg: extraction settings (eps, min_pts, min_object_points)

    Returns:
        (K, 3) points of the dominant cluster, noise excluded

    Raises:
        ClusteringError: all points are noise or the dominant cluster is too small
    """
    cfg = cfg or ExtractionConfig()
    pts = np.asarray(initial, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ClusteringError(REASON_EMPTY_FRUSTUM, "no points to cluster")

    labels = DBSCAN(eps=cfg.eps, min_samples=cfg.min_pts).fit_predict(pts)
    clustered = labels[labels >= 0]
    if clustered.size == 0:
        raise ClusteringError(REASON_ALL_NOISE, f"all {len(pts)} points are noise")

    counts = np.bincount(clustered)
    # argmax keeps the smallest label on ties
    best = int(np.argmax(counts))
    if counts[best] < cfg.min_object_points:
        raise ClusteringError(
            REASON_TOO_FEW_POINTS,
            f"largest cluster has {counts[best]} < {cfg.min_object_points} points"
        )
    return pts[labels == best]


def finalize_object_points(
    cluster: np.ndarray,
    cfg: Optional[ExtractionConfig] = None,
    rng_seed=0
) -> ObjectPoints:
    """
    Median-height filter, fixed-size sampling and density computation.

    Points lower in 3D space than the median (larger camera y) are removed;
    ties with the median are kept. The survivors are sampled to cfg.n_sample
    points, with replacement only when fewer remain.

    Args:
        cluster: (K, 3) non-empty dominant cluster
        cfg: extraction settings (n_sample, R)
        rng_seed: seed (int or SeedSequence) of the sampling generator

    Returns:
        ObjectPoints
    """
    cfg = cfg or ExtractionConfig()
    pts = np.asarray(cluster, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("cannot finalize an empty cluster")

    median_y = float(np.median(pts[:, 1]))
    upper = pts[pts[:, 1] <= median_y]

    rng = np.random.default_rng(rng_seed)
    replace = len(upper) < cfg.n_sample
    idx = rng.choice(len(upper), size=cfg.n_sample, replace=replace)
    return ObjectPoints.from_points(upper[idx], cfg.R)


def object_seed(seed: int, frame_id: str, det_index: int) -> np.random.SeedSequence:
    """Process-independent seed for one detection."""
    return np.random.SeedSequence([int(seed), zlib.crc32(frame_id.encode("utf-8")), int(det_index)])


def frame_ground(points: np.ndarray, cfg: ExtractionConfig, seed: int, frame_id: str) -> GroundPlane:
    """Fit the frame's ground plane, falling back to the configured height."""
    rng = np.random.default_rng([int(seed), zlib.crc32(frame_id.encode("utf-8"))])
    try:
        return fit_ground_plane(points, cfg, rng)
    except GroundPlaneError as e:
        logger.warning(f"[Frame {frame_id}] RANSAC failed ({e}); using y = {cfg.fallback_ground_height}")
        return GroundPlane.horizontal(cfg.fallback_ground_height)


def extract_objects(
    scan: RawScan,
    cam: CameraModel,
    detections: List[Detection2D],
    cfg: Optional[ExtractionConfig] = None,
    seed: int = 0
) -> Tuple[List[Optional[ObjectPoints]], List[SkipRecord]]:
    """
    Run the whole extraction chain for one frame.

    Args:
        scan: raw LiDAR scan
        cam: camera model
        detections: the frame's 2D detections
        cfg: extraction settings
        seed: run seed

    Returns:
        (objects, skips): objects[i] is None when detection i was skipped
    """
    cfg = cfg or ExtractionConfig()
    objects: List[Optional[ObjectPoints]] = []
    skips: List[SkipRecord] = []
    if not detections:
        return objects, skips

    frame_id = detections[0].frame_id
    points = transform_to_camera(scan, cam, cfg.min_depth)
    plane = frame_ground(points, cfg, seed, frame_id)
    above = remove_ground(points, plane, cfg)
    logger.debug(f"[Frame {frame_id}] {len(above)}/{len(points)} points above ground")

    for idx, det in enumerate(detections):
        problem = det.problem(cam.image_size)
        if problem is not None:
            logger.warning(f"[Frame {frame_id}] detection {idx} ({det.cls}) skipped: {problem}")
            skips.append(SkipRecord(frame_id=frame_id, det_index=idx, cls=det.cls,
                                    reason=REASON_BAD_DETECTION, message=problem))
            objects.append(None)
            continue
        det = det.clamped(cam.image_size)
        initial = select_frustum(above, det, cam)
        try:
            if len(initial) == 0:
                raise ClusteringError(REASON_EMPTY_FRUSTUM, "no points project into the detection")
            cluster = cluster_select(initial, cfg)
            objects.append(finalize_object_points(cluster, cfg, object_seed(seed, frame_id, idx)))
        except ClusteringError as e:
            logger.warning(f"[Frame {frame_id}] detection {idx} ({det.cls}) skipped: {e}")
            skips.append(SkipRecord(frame_id=frame_id, det_index=idx, cls=det.cls,
                                    reason=e.reason, message=str(e)))
            objects.append(None)

    return objects, skips
