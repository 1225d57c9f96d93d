"""Point cloud module: camera model, ground removal and object-LiDAR-point extraction."""

from .config import ExtractionConfig
from .camera import CameraModel, RawScan, transform_to_camera, project_to_image, project_points
from .ground import GroundPlane, fit_ground_plane, remove_ground
from .extraction import (
    Detection2D,
    ObjectPoints,
    SkipRecord,
    compute_density,
    select_frustum,
    cluster_select,
    finalize_object_points,
    extract_objects,
    object_seed,
)

__all__ = [
    'ExtractionConfig', 'CameraModel', 'RawScan', 'transform_to_camera', 'project_to_image',
    'project_points', 'GroundPlane', 'fit_ground_plane', 'remove_ground', 'Detection2D',
    'ObjectPoints', 'SkipRecord', 'compute_density', 'select_frustum', 'cluster_select',
    'finalize_object_points', 'extract_objects', 'object_seed',
]
