"""Orientation module: pairwise-direction histogram, yaw heuristic and angle conversions."""

from .histogram import (
    DEFAULT_BIN_WIDTH,
    DirectionHistogram,
    fold_direction,
    pair_directions,
    pairwise_direction_histogram,
)
from .estimator import (
    DEFAULT_OFFSET_THRESHOLD,
    OrientationEstimate,
    estimate_orientation,
    global_to_local,
    heading_from_mode,
    local_to_global,
    normalize_mode,
)

__all__ = [
    'DEFAULT_BIN_WIDTH', 'DirectionHistogram', 'fold_direction', 'pair_directions',
    'pairwise_direction_histogram', 'DEFAULT_OFFSET_THRESHOLD', 'OrientationEstimate',
    'estimate_orientation', 'global_to_local', 'heading_from_mode', 'local_to_global',
    'normalize_mode',
]
