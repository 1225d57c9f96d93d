"""
Total Objective

The y-location and orientation terms, the total loss report and the
finite-difference gradients of the balanced loss with respect to the
box BEV center.
"""

import math
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry import Box3D, Vec2BEV, bev_rect_of
from ..pointcloud import CameraModel, ObjectPoints
from .config import LossConfig
from .pointwise import (
    CAMERA_ORIGIN_BEV,
    alignment_targets,
    balanced_loss,
    ray_trace_targets,
)


class CenterParam(BaseModel):
    """Projected 3D center (t_x, t_y) in pixels plus instance depth z in meters."""

    model_config = ConfigDict(frozen=True)

    t_x: float
    t_y: float
    z: float = Field(gt=0)


def lift_center(c: CenterParam, cam: CameraModel) -> np.ndarray:
    """
    Back-project (t_x, t_y, z) to the camera-frame point
    [(t_x - c_x) / f_x * z, (t_y - c_y) / f_y * z, z].
    """
    if c.z <= 0:
        raise ValueError(f"depth must be positive, got {c.z}")
    return np.array([
        (c.t_x - cam.c_x) / cam.f_x * c.z,
        (c.t_y - cam.c_y) / cam.f_y * c.z,
        c.z,
    ])


def smooth_l1(diff: float, beta: float = 1.0) -> float:
    d = abs(diff)
    if d < beta:
        return 0.5 * d * d / beta
    return d - 0.5 * beta


def loc_y_loss(pts: ObjectPoints, box: Box3D, cfg: Optional[LossConfig] = None) -> float:
    """Smooth-L1 between the box's geometric-center y and the mean point height y_L."""
    cfg = cfg or LossConfig()
    return smooth_l1(box.center_y - pts.y_L, cfg.smooth_l1_beta)


def orient_loss(theta: float, theta_target: float) -> float:
    """1 - cos(2 (theta - target)): zero at equality mod pi, 2 at a right angle."""
    return 1.0 - math.cos(2.0 * (theta - theta_target))


class LossReport(BaseModel):
    """
    All loss terms for one box hypothesis.

    geometry, ray_tracing and center are per-point means; balancing is the
    density-balanced combination; total = balancing + loc_y + orient.
    grad_x / grad_z are d(balancing)/d(x, z) by central differences.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    geometry: float = Field(ge=0)
    ray_tracing: float = Field(ge=0)
    center: float = Field(ge=0)
    balancing: float = Field(ge=0)
    loc_y: float = Field(ge=0)
    orient: float = Field(ge=0)
    total: float = Field(ge=0)
    grad_x: float = 0.0
    grad_z: float = 0.0
    per_point_geometry: Optional[np.ndarray] = None
    per_point_ray: Optional[np.ndarray] = None
    per_point_center: Optional[np.ndarray] = None

    def summary(self) -> dict:
        """Scalar fields only, for manifests and logs."""
        return {
            "geometry": self.geometry,
            "ray_tracing": self.ray_tracing,
            "center": self.center,
            "balancing": self.balancing,
            "loc_y": self.loc_y,
            "orient": self.orient,
            "total": self.total,
            "grad_x": self.grad_x,
            "grad_z": self.grad_z,
        }


def with_center(box: Box3D, x: float, z: float) -> Box3D:
    """Copy of the box moved to a new BEV center."""
    return box.model_copy(update={"x": float(x), "z": float(z)})


def balancing_objective(pts: ObjectPoints, box: Box3D, cfg: Optional[LossConfig] = None,
                        cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> Callable[[float, float], float]:
    """The balanced loss as a function of the BEV center (x, z), other parameters fixed."""
    cfg = cfg or LossConfig()

    def f(x: float, z: float) -> float:
        return balanced_loss(pts, with_center(box, x, z), cfg, cam_origin_bev)[0]

    return f


def finite_difference_gradient(f: Callable[[float, float], float], x: float, z: float,
                               h: float) -> Tuple[float, float]:
    """Central-difference gradient of f at (x, z) with step h."""
    gx = (f(x + h, z) - f(x - h, z)) / (2.0 * h)
    gz = (f(x, z + h) - f(x, z - h)) / (2.0 * h)
    return gx, gz


def richardson_gradient(f: Callable[[float, float], float], x: float, z: float,
                        h: float) -> Tuple[float, float]:
    """Fourth-order gradient: (4 D(h/2) - D(h)) / 3 from two central differences."""
    coarse = finite_difference_gradient(f, x, z, h)
    fine = finite_difference_gradient(f, x, z, h / 2.0)
    return ((4.0 * fine[0] - coarse[0]) / 3.0, (4.0 * fine[1] - coarse[1]) / 3.0)


def total_loss(pts: ObjectPoints, box: Box3D, cfg: Optional[LossConfig] = None,
               theta_target: Optional[float] = None,
               cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> LossReport:
    """
    Evaluate the full objective L = L_balancing + L_loc_y + L_orient.

    Args:
        pts: object points
        box: box hypothesis
        cfg: loss settings
        theta_target: heuristic orientation target; the box's own yaw when omitted
        cam_origin_bev: camera center in BEV

    Returns:
        LossReport with scalars, per-point breakdown and center gradients
    """
    cfg = cfg or LossConfig()
    balancing, parts = balanced_loss(pts, box, cfg, cam_origin_bev)
    ly = loc_y_loss(pts, box, cfg)
    target = box.theta_y if theta_target is None else theta_target
    lo = orient_loss(box.theta_y, target)
    f = balancing_objective(pts, box, cfg, cam_origin_bev)
    gx, gz = finite_difference_gradient(f, box.x, box.z, cfg.h_fd)
    return LossReport(
        geometry=float(np.mean(parts.geometry)),
        ray_tracing=float(np.mean(parts.ray_tracing)),
        center=float(np.mean(parts.center)),
        balancing=balancing,
        loc_y=ly,
        orient=max(0.0, lo),
        total=balancing + ly + max(0.0, lo),
        grad_x=gx,
        grad_z=gz,
        per_point_geometry=parts.geometry,
        per_point_ray=parts.ray_tracing,
        per_point_center=parts.center,
    )


def _edge_ids(points: np.ndarray, box: Box3D) -> np.ndarray:
    """Which rectangle side (0..3) each boundary point lies on."""
    rect = bev_rect_of(box)
    local = rect.to_local(points)
    ratio = np.abs(local) / np.array([rect.half_l, rect.half_w])
    axis = np.argmax(ratio, axis=1)
    sign = np.where(local[np.arange(len(local)), axis] >= 0, 1, 0)
    return axis * 2 + sign


def assignment_signature(pts: ObjectPoints, box: Box3D,
                         cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> Tuple[bytes, ...]:
    """
    Discrete state of the piecewise-smooth loss at a box position.

    Includes the edge each point is matched to, ray hit flags and the sign
    patterns of every L1 residual. The loss is smooth wherever this
    signature is locally constant.
    """
    rect = bev_rect_of(box)
    p_i = alignment_targets(pts.bev, rect)
    rays = ray_trace_targets(pts.bev, rect, cam_origin_bev)
    center = np.array([box.x, box.z])
    parts = (
        _edge_ids(p_i, box),
        np.where(rays.hit, _edge_ids(rays.targets, box), -1),
        np.sign(pts.bev - p_i).astype(np.int8),
        np.sign(pts.bev - rays.targets).astype(np.int8),
        np.sign(pts.bev - center).astype(np.int8),
    )
    return tuple(np.ascontiguousarray(p).tobytes() for p in parts)


def is_assignment_stable(pts: ObjectPoints, box: Box3D, h: float,
                         cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> bool:
    """True when the assignment signature is unchanged within +/- 2h in x and z."""
    ref = assignment_signature(pts, box, cam_origin_bev)
    for dx, dz in ((2 * h, 0), (-2 * h, 0), (0, 2 * h), (0, -2 * h), (h, 0), (-h, 0), (0, h), (0, -h)):
        shifted = with_center(box, box.x + dx, box.z + dz)
        if assignment_signature(pts, shifted, cam_origin_bev) != ref:
            return False
    return True
