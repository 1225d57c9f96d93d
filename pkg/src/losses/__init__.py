"""Losses module: geometric alignment, ray tracing, density balancing and the total objective."""

from .config import LossConfig
from .pointwise import (
    EPS_CENTER,
    CAMERA_ORIGIN_BEV,
    center_loss,
    geometric_alignment_loss,
    ray_tracing_loss,
    balanced_loss,
    balanced_breakdown,
    balance,
    weighted_sum,
    alignment_targets,
    ray_trace_targets,
)
from .objective import (
    CenterParam,
    LossReport,
    lift_center,
    loc_y_loss,
    orient_loss,
    smooth_l1,
    total_loss,
    with_center,
    balancing_objective,
    finite_difference_gradient,
    richardson_gradient,
    assignment_signature,
    is_assignment_stable,
)

__all__ = [
    'LossConfig', 'EPS_CENTER', 'CAMERA_ORIGIN_BEV', 'center_loss', 'geometric_alignment_loss',
    'ray_tracing_loss', 'balanced_loss', 'balanced_breakdown', 'balance', 'weighted_sum',
    'alignment_targets', 'ray_trace_targets', 'CenterParam', 'LossReport', 'lift_center',
    'loc_y_loss', 'orient_loss', 'smooth_l1', 'total_loss', 'with_center', 'balancing_objective',
    'finite_difference_gradient', 'richardson_gradient', 'assignment_signature',
    'is_assignment_stable',
]
