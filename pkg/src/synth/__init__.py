"""Synthetic scenes: ray-cast LiDAR frames, KITTI export and brute-force oracles."""

from .scene import (
    SceneSpec,
    SynthScene,
    VELO_TO_CAM,
    check_boxes,
    first_hits,
    fan_directions,
    generate_scene,
    parse_scene_spec,
    random_scene_boxes,
    row_heights,
)
from .oracles import (
    GridOracleResult,
    grid_oracle,
    rasterized_iou_oracle,
    relative_gap,
    split_minima,
)
from .export import export_kitti, projected_bbox

__all__ = [
    'SceneSpec', 'SynthScene', 'VELO_TO_CAM', 'check_boxes', 'first_hits', 'fan_directions',
    'generate_scene', 'parse_scene_spec', 'random_scene_boxes', 'row_heights',
    'GridOracleResult', 'grid_oracle', 'rasterized_iou_oracle', 'relative_gap', 'split_minima',
    'export_kitti', 'projected_bbox',
]
