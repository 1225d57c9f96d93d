"""
Rotated-box overlap: BEV IoU by Sutherland-Hodgman clipping and 3D IoU.
"""

import numpy as np

from .types import BevRect, Box3D, bev_rect_of, polygon_area

_EPS = 1e-12


def _clip(subject: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Keep the part of `subject` left of the directed edge p -> q (CCW clip polygon)."""
    if len(subject) == 0:
        return subject
    edge = q - p

    def side(v: np.ndarray) -> float:
        return edge[0] * (v[1] - p[1]) - edge[1] * (v[0] - p[0])

    out = []
    n = len(subject)
    for i in range(n):
        cur = subject[i]
        prev = subject[i - 1]
        s_cur, s_prev = side(cur), side(prev)
        if s_cur >= -_EPS:
            if s_prev < -_EPS:
                out.append(prev + (cur - prev) * (s_prev / (s_prev - s_cur)))
            out.append(cur)
        elif s_prev >= -_EPS:
            out.append(prev + (cur - prev) * (s_prev / (s_prev - s_cur)))
    return np.array(out) if out else np.empty((0, 2))


def intersection_polygon(a: BevRect, b: BevRect) -> np.ndarray:
    """Convex intersection polygon of two rectangles, (K, 2), possibly empty."""
    poly = a.corners()
    clip = b.corners()
    for i in range(4):
        poly = _clip(poly, clip[i], clip[(i + 1) % 4])
        if len(poly) < 3:
            return np.empty((0, 2))
    return poly


def bev_intersection_area(a: BevRect, b: BevRect) -> float:
    return polygon_area(intersection_polygon(a, b))


def bev_iou(a: BevRect, b: BevRect) -> float:
    """
    Intersection-over-union of two rotated BEV rectangles.

    Args:
        a: first rectangle
        b: second rectangle

    Returns:
        IoU in [0, 1]
    """
    inter = bev_intersection_area(a, b)
    union = a.area() + b.area() - inter
    if union <= _EPS:
        return 0.0
    return float(min(1.0, max(0.0, inter / union)))


def vertical_overlap(a: Box3D, b: Box3D) -> float:
    """Overlap of the vertical spans [y - h, y] (camera y points down)."""
    top = max(a.y - a.h, b.y - b.h)
    bottom = min(a.y, b.y)
    return max(0.0, bottom - top)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """
    3D IoU: BEV intersection area times vertical overlap over the volume union.

    Args:
        a: first box
        b: second box

    Returns:
        IoU in [0, 1]
    """
    overlap_h = vertical_overlap(a, b)
    if overlap_h <= 0.0:
        return 0.0
    inter = bev_intersection_area(bev_rect_of(a), bev_rect_of(b)) * overlap_h
    union = a.volume + b.volume - inter
    if union <= _EPS:
        return 0.0
    return float(min(1.0, max(0.0, inter / union)))
