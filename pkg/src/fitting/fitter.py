"""
Pseudo-Label Fitter

Per-object minimization of the balanced loss over the box BEV center.
Dimensions come from class priors and the yaw from the orientation
heuristic, so only (x, z) is optimized; y follows from the mean point height.
"""

import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry import Box3D
from ..kitti.labels import KittiLabel, label_from_box
from ..losses import (
    LossReport,
    balancing_objective,
    finite_difference_gradient,
    total_loss,
    with_center,
)
from ..orientation import OrientationEstimate, estimate_orientation
from ..pointcloud import (
    CameraModel,
    Detection2D,
    ExtractionConfig,
    ObjectPoints,
    RawScan,
    SkipRecord,
    extract_objects,
    project_points,
)
from ..utils.errors import FitError, REASON_BAD_DETECTION, REASON_EMPTY_FRUSTUM, REASON_NO_DIMS
from ..utils.logger import get_logger
from .config import FitConfig, OptimizerConfig

logger = get_logger(__name__)


class FitResult(BaseModel):
    """
    One pseudo-label with its provenance.

    Attributes:
        frame_id, det_index, cls: the source detection
        bbox: the detection's 2D box, reused in the KITTI label
        box: fitted 3D box
        loss_report: loss terms at the fitted box
        orientation: heuristic yaw estimate the box was frozen to
        converged: the descent ended on a plateau rather than the iteration cap
        iters: descent iterations of the winning start
        score: detector score passed through
        y_shift: y correction applied by the 2D-3D consistency step
    """

    model_config = ConfigDict(frozen=True)

    frame_id: str
    det_index: int = Field(ge=0)
    cls: str
    bbox: Tuple[float, float, float, float]
    box: Box3D
    loss_report: LossReport
    orientation: OrientationEstimate
    converged: bool
    iters: int = Field(ge=0)
    score: float = Field(ge=0, le=1)
    y_shift: float = 0.0

    def to_kitti_label(self) -> KittiLabel:
        """KITTI label line for this box (bottom-face y, alpha from the center bearing)."""
        return label_from_box(self.box, self.cls, self.bbox, score=self.score)


class DescentRun(NamedTuple):
    x: float
    z: float
    loss: float
    init_loss: float
    iters: int
    converged: bool


def initial_centers(centroid: np.ndarray, w: float, l: float, strategies: List[str]) -> List[Tuple[float, float]]:
    """
    Start points for the descent.

    centroid: the BEV centroid of the points; push_w / push_l: the centroid
    moved away from the camera along its viewing ray by w/2 or l/2.
    """
    dist = float(np.hypot(centroid[0], centroid[1]))
    ray = centroid / dist if dist > 0 else np.array([0.0, 1.0])
    starts = []
    for name in strategies:
        if name == "centroid":
            p = centroid
        elif name == "push_w":
            p = centroid + ray * (w / 2.0)
        elif name == "push_l":
            p = centroid + ray * (l / 2.0)
        else:
            raise ValueError(f"unknown init strategy: {name}")
        starts.append((float(p[0]), float(p[1])))
    return starts


def descend(f, x: float, z: float, opt: OptimizerConfig, h: float) -> DescentRun:
    """
    Normalized gradient descent with step halving.

    A step is taken only when it lowers the loss, otherwise the step length
    is halved. Stops after opt.plateau_iters consecutive iterations with
    |delta loss| < opt.plateau_tol, or at opt.max_iters.
    """
    loss = f(x, z)
    init_loss = loss
    step = opt.step_size
    flat = 0
    iters = 0
    converged = False
    for iters in range(1, opt.max_iters + 1):
        gx, gz = finite_difference_gradient(f, x, z, h)
        gnorm = math.hypot(gx, gz)
        if gnorm == 0.0:
            converged = True
            break
        nx, nz = x - step * gx / gnorm, z - step * gz / gnorm
        candidate = f(nx, nz)
        if candidate < loss:
            delta = loss - candidate
            x, z, loss = nx, nz, candidate
        else:
            delta = 0.0
            step *= 0.5
        flat = flat + 1 if delta < opt.plateau_tol else 0
        if flat >= opt.plateau_iters:
            converged = True
            break
    return DescentRun(x=x, z=z, loss=loss, init_loss=init_loss, iters=iters, converged=converged)


def fit_object(pts: Optional[ObjectPoints], det: Detection2D, cam: CameraModel,
               cfg: Optional[FitConfig] = None, det_index: int = 0) -> FitResult:
    """
    Fit one pseudo-label box to an object's points.

    Args:
        pts: object points of the detection
        det: the 2D detection (class, score, bbox)
        cam: camera model
        cfg: fitter settings
        det_index: position of the detection in its frame

    Returns:
        FitResult with the lowest-loss box over all starts

    Raises:
        FitError: no dimension prior for the class, or no points
        OrientationError: every point pair is degenerate
    """
    cfg = cfg or FitConfig()
    dims = cfg.class_dims.get(det.cls)
    if dims is None:
        raise FitError(REASON_NO_DIMS, f"no dimension prior for class {det.cls!r}")
    if pts is None or pts.M == 0:
        raise FitError(REASON_EMPTY_FRUSTUM, "no object points")
    if pts.R != cfg.R:
        pts = ObjectPoints.from_points(pts.pts3d, cfg.R)

    estimate = estimate_orientation(pts, cfg.C, cfg.bin_width)
    h, w, l = dims
    centroid = np.mean(pts.bev, axis=0)
    base = Box3D(
        x=float(centroid[0]), y=pts.y_L + h / 2.0, z=float(centroid[1]),
        h=h, w=w, l=l, theta_y=estimate.theta_y,
    )

    loss_cfg = cfg.loss_config()
    objective = balancing_objective(pts, base, loss_cfg)
    best: Optional[DescentRun] = None
    for x0, z0 in initial_centers(centroid, w, l, cfg.multistart):
        run = descend(objective, x0, z0, cfg.optimizer, cfg.h_fd)
        logger.debug(f"[{det.frame_id}#{det_index}] start ({x0:.2f}, {z0:.2f}): "
                     f"{run.init_loss:.4f} -> {run.loss:.4f} in {run.iters} iters")
        if best is None or run.loss < best.loss:
            best = run

    box = with_center(base, best.x, best.z)
    report = total_loss(pts, box, loss_cfg, theta_target=estimate.theta_y)
    return FitResult(
        frame_id=det.frame_id,
        det_index=det_index,
        cls=det.cls,
        bbox=det.bbox,
        box=box,
        loss_report=report,
        orientation=estimate,
        converged=best.converged,
        iters=best.iters,
        score=det.score,
    )


def adjust_y_2d3d(box: Box3D, det: Detection2D, cam: CameraModel, max_rounds: int = 10) -> Box3D:
    """
    Shift box.y so the projected box's vertical span matches the 2D box.

    Least squares over the topmost and bottommost projected corners; the
    extreme corners are re-selected until they stop changing.

    Args:
        box: fitted box (z > 0)
        det: detection providing the target rows y1, y2
        cam: camera model
        max_rounds: re-selection rounds

    Returns:
        Box with only y changed; the input box when any corner is behind the camera
    """
    corners = box.corners()
    if np.any(corners[:, 2] <= 1e-6):
        return box
    v0 = project_points(corners, cam)[:, 1]
    slope = cam.f_y / corners[:, 2]
    _, top, _, bottom = det.bbox

    delta = 0.0
    chosen = None
    for _ in range(max_rounds):
        v = v0 + slope * delta
        pair = (int(np.argmin(v)), int(np.argmax(v)))
        if pair == chosen:
            break
        chosen = pair
        a, b = pair
        r_top = v0[a] - top
        r_bottom = v0[b] - bottom
        delta = -(slope[a] * r_top + slope[b] * r_bottom) / (slope[a] ** 2 + slope[b] ** 2)
    return box.model_copy(update={"y": box.y + float(delta)})


def fit_objects(
    objects: List[Optional[ObjectPoints]],
    detections: List[Detection2D],
    cam: CameraModel,
    cfg: Optional[FitConfig] = None
) -> Tuple[List[FitResult], List[SkipRecord]]:
    """
    Fit every extracted object of a frame; failures become skip records.

    Args:
        objects: per-detection points, None where extraction already skipped
        detections: the frame's detections, aligned with objects
        cam: camera model
        cfg: fitter settings

    Returns:
        (results, skips) in detection order
    """
    cfg = cfg or FitConfig()
    results: List[FitResult] = []
    skips: List[SkipRecord] = []
    for idx, (pts, det) in enumerate(zip(objects, detections)):
        if pts is None:
            continue
        problem = det.problem(cam.image_size)
        if problem is not None:
            logger.warning(f"[Frame {det.frame_id}] detection {idx} ({det.cls}) skipped: {problem}")
            skips.append(SkipRecord(frame_id=det.frame_id, det_index=idx, cls=det.cls,
                                    reason=REASON_BAD_DETECTION, message=problem))
            continue
        try:
            result = fit_object(pts, det, cam, cfg, det_index=idx)
        except FitError as e:
            logger.warning(f"[Frame {det.frame_id}] detection {idx} ({det.cls}) skipped: {e}")
            skips.append(SkipRecord(frame_id=det.frame_id, det_index=idx, cls=det.cls,
                                    reason=e.reason, message=str(e)))
            continue
        if cfg.adjust_y:
            adjusted = adjust_y_2d3d(result.box, det, cam)
            result = result.model_copy(update={"box": adjusted, "y_shift": adjusted.y - result.box.y})
        results.append(result)
    return results, skips


def fit_frame(
    scan: RawScan,
    cam: CameraModel,
    detections: List[Detection2D],
    cfg: Optional[FitConfig] = None,
    extraction: Optional[ExtractionConfig] = None,
    seed: int = 0
) -> Tuple[List[FitResult], List[SkipRecord]]:
    """
    Extract and fit all detections of one frame.

    Args:
        scan: raw LiDAR scan
        cam: camera model
        detections: the frame's 2D detections
        cfg: fitter settings
        extraction: extraction settings (R is taken from cfg)
        seed: run seed

    Returns:
        (results, skips); per-object failures never abort the frame
    """
    cfg = cfg or FitConfig()
    extraction = (extraction or ExtractionConfig()).model_copy(update={"R": cfg.R})
    objects, skips = extract_objects(scan, cam, detections, extraction, seed)
    results, fit_skips = fit_objects(objects, detections, cam, cfg)
    skips = sorted(skips + fit_skips, key=lambda s: s.det_index)
    if detections:
        logger.info(f"[Frame {detections[0].frame_id}] {len(results)} boxes, {len(skips)} skipped")
    return results, skips
