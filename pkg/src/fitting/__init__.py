"""Fitting module: per-object pseudo-label optimization and the gradient check."""

from .config import DEFAULT_CLASS_DIMS, FitConfig, OptimizerConfig
from .fitter import (
    DescentRun,
    FitResult,
    adjust_y_2d3d,
    descend,
    fit_frame,
    fit_object,
    fit_objects,
    initial_centers,
)
from .gradcheck import GradCheckConfig, GradCheckReport, gradcheck

__all__ = [
    'DEFAULT_CLASS_DIMS', 'FitConfig', 'OptimizerConfig', 'DescentRun', 'FitResult',
    'adjust_y_2d3d', 'descend', 'fit_frame', 'fit_object', 'fit_objects', 'initial_centers',
    'GradCheckConfig', 'GradCheckReport', 'gradcheck',
]
