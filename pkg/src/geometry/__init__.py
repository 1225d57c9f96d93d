"""Geometry module: BEV/3D box types, ray-rectangle intersection and rotated IoU."""

from .types import (
    Vec2BEV,
    Box3D,
    BevRect,
    RaySegment,
    bev_rect_of,
    normalize_angle,
    polygon_area,
    corner_set,
)
from .intersect import SlabHits, ray_rect_hits, ray_rect_intersect
from .iou import bev_iou, iou_3d, bev_intersection_area, intersection_polygon

__all__ = [
    'Vec2BEV', 'Box3D', 'BevRect', 'RaySegment', 'bev_rect_of', 'normalize_angle',
    'polygon_area', 'corner_set', 'SlabHits', 'ray_rect_hits', 'ray_rect_intersect',
    'bev_iou', 'iou_3d', 'bev_intersection_area', 'intersection_polygon',
]
