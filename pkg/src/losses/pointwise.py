"""
Point-wise BEV Losses

Geometric alignment (center-to-point ray vs. box boundary), ray tracing
(camera-to-point ray, Z-buffered), the center regularizer and the
density-balanced combination. All functions are vectorized over points.
"""

from typing import NamedTuple, Optional

import numpy as np

from ..geometry import BevRect, Box3D, Vec2BEV, bev_rect_of, ray_rect_hits
from ..pointcloud import ObjectPoints
from .config import LossConfig

# Points closer than this to the ray origin have no defined ray
EPS_CENTER = 1e-6

CAMERA_ORIGIN_BEV = Vec2BEV(x=0.0, z=0.0)


def _unit_rays(origin: np.ndarray, targets: np.ndarray):
    delta = targets - origin
    norms = np.linalg.norm(delta, axis=1)
    valid = norms > EPS_CENTER
    dirs = np.zeros_like(delta)
    dirs[valid] = delta[valid] / norms[valid, None]
    return dirs, valid


def center_loss(pts: ObjectPoints, box: Box3D) -> np.ndarray:
    """L1 distance in BEV from each point to the box center."""
    return np.abs(pts.bev - np.array([box.x, box.z])).sum(axis=1)


def alignment_targets(bev: np.ndarray, rect: BevRect) -> np.ndarray:
    """
    Boundary points P_I hit by the rays from the rectangle center through each point.

    Rows for points within EPS_CENTER of the center are set to the point itself.
    """
    center = rect.center.as_array()
    dirs, valid = _unit_rays(center, bev)
    targets = bev.copy()
    if np.any(valid):
        slab = ray_rect_hits(center, dirs[valid], rect)
        # the center is inside, so the exit hit is the single boundary crossing
        targets[valid] = center + slab.t_far[:, None] * dirs[valid]
    return targets


def geometric_alignment_loss(pts: ObjectPoints, box: Box3D) -> np.ndarray:
    """
    ||P - Intersect(Ray(center -> P), box)||_1 for every point.

    Args:
        pts: object points
        box: box hypothesis

    Returns:
        (M,) per-point losses; points at the center contribute 0
    """
    targets = alignment_targets(pts.bev, bev_rect_of(box))
    return np.abs(pts.bev - targets).sum(axis=1)


class RayTraceHits(NamedTuple):
    targets: np.ndarray
    hit: np.ndarray


def ray_trace_targets(bev: np.ndarray, rect: BevRect, origin: Vec2BEV = CAMERA_ORIGIN_BEV) -> RayTraceHits:
    """
    Z-buffered hits P_R of camera rays through each point.

    The nearer hit is used; an origin inside the rectangle uses the exit hit.
    """
    o = origin.as_array()
    dirs, valid = _unit_rays(o, bev)
    targets = bev.copy()
    hit = np.zeros(len(bev), dtype=bool)
    if np.any(valid):
        slab = ray_rect_hits(o, dirs[valid], rect)
        t = np.where(slab.inside | (slab.t_near < 0.0), slab.t_far, slab.t_near)
        idx = np.flatnonzero(valid)[slab.hit]
        targets[idx] = o + t[slab.hit, None] * dirs[idx]
        hit[idx] = True
    return RayTraceHits(targets=targets, hit=hit)


def ray_tracing_loss(pts: ObjectPoints, box: Box3D,
                     cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> np.ndarray:
    """
    ||P - P_R||_1 where P_R is the nearer hit of the camera ray through P; 0 on miss.

    Args:
        pts: object points
        box: box hypothesis
        cam_origin_bev: camera optical center projected to BEV

    Returns:
        (M,) per-point losses
    """
    hits = ray_trace_targets(pts.bev, bev_rect_of(box), cam_origin_bev)
    loss = np.abs(pts.bev - hits.targets).sum(axis=1)
    loss[~hits.hit] = 0.0
    return loss


def balance(per_point: np.ndarray, density: np.ndarray) -> float:
    """(1/M) * sum(loss_i / E_i)."""
    per_point = np.asarray(per_point, dtype=float)
    if per_point.size == 0:
        return 0.0
    return float(np.sum(per_point / np.asarray(density, dtype=float)) / per_point.size)


def weighted_sum(per_point: np.ndarray, density: np.ndarray) -> float:
    """sum(loss_i / E_i) before averaging."""
    return float(np.sum(np.asarray(per_point, dtype=float) / np.asarray(density, dtype=float)))


class BalancedBreakdown(NamedTuple):
    """Per-point terms of the balanced objective."""
    geometry: np.ndarray
    ray_tracing: np.ndarray
    center: np.ndarray
    combined: np.ndarray
    weights: np.ndarray


def balanced_breakdown(pts: ObjectPoints, box: Box3D, cfg: Optional[LossConfig] = None,
                       cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV) -> BalancedBreakdown:
    """Evaluate every point-wise term and the per-point combination used for balancing."""
    cfg = cfg or LossConfig()
    geo = geometric_alignment_loss(pts, box)
    ray = ray_tracing_loss(pts, box, cam_origin_bev)
    cen = center_loss(pts, box)
    if cfg.center_only:
        combined = cen
    else:
        combined = cfg.w_geom * geo + cfg.w_ray * ray + cfg.lam * cen
    weights = 1.0 / pts.density if (cfg.balance and not cfg.center_only) else np.ones(pts.M)
    return BalancedBreakdown(geometry=geo, ray_tracing=ray, center=cen, combined=combined, weights=weights)


def balanced_loss(pts: ObjectPoints, box: Box3D, cfg: Optional[LossConfig] = None,
                  cam_origin_bev: Vec2BEV = CAMERA_ORIGIN_BEV):
    """
    Density-balanced point-wise loss.

    L = (1/M) * sum_i (w_geom * L_geo_i + w_ray * L_ray_i + lam * L_center_i) / E_i

    Args:
        pts: object points with densities
        box: box hypothesis
        cfg: loss settings

    Returns:
        (scalar, BalancedBreakdown)
    """
    parts = balanced_breakdown(pts, box, cfg, cam_origin_bev)
    value = float(np.sum(parts.combined * parts.weights) / pts.M)
    return value, parts
