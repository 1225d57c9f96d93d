"""
Fitter configuration.

Class dimension priors, loss weights, orientation heuristic settings,
optimizer schedule and the loss ablation toggles.
"""

import math
from typing import Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..losses import LossConfig

InitStrategy = Literal["centroid", "push_w", "push_l"]

DEFAULT_CLASS_DIMS: Dict[str, Tuple[float, float, float]] = {
    "Car": (1.6, 1.8, 4.0),
    "Pedestrian": (1.75, 0.6, 0.8),
    "Cyclist": (1.75, 0.6, 1.8),
}


class OptimizerConfig(BaseModel):
    """
    Gradient descent schedule over the BEV center.

    Attributes:
        step_size: initial step length in meters along the negative gradient
        max_iters: hard iteration cap
        plateau_tol: |delta loss| below which an iteration counts as flat
        plateau_iters: consecutive flat iterations that end the descent
    """

    model_config = ConfigDict(frozen=True)

    step_size: float = Field(default=0.5, gt=0)
    max_iters: int = Field(default=500, ge=1)
    plateau_tol: float = Field(default=1e-6, ge=0)
    plateau_iters: int = Field(default=10, ge=1)


class FitConfig(BaseModel):
    """
    Settings of the per-object pseudo-label fitter.

    Attributes:
        class_dims: category -> (h, w, l) in meters
        R: density radius in meters
        lam: center-loss weight (config key "lambda")
        C: x-extent threshold of the orientation heuristic (m)
        bin_width: direction histogram bin width (rad)
        optimizer: descent schedule
        multistart: initialization strategies, tried in order
        h_fd: finite-difference step (m)
        smooth_l1_beta: y-location loss threshold (m)
        use_geom / use_ray / use_balancing / use_center_only: loss ablation toggles
        adjust_y: apply the 2D-3D y consistency step after fitting
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    class_dims: Dict[str, Tuple[float, float, float]] = Field(default_factory=lambda: dict(DEFAULT_CLASS_DIMS))
    R: float = Field(default=0.4, gt=0)
    lam: float = Field(default=0.1, ge=0, alias="lambda")
    C: float = Field(default=3.0, ge=0)
    bin_width: float = Field(default=math.pi / 90.0, gt=0, le=math.pi)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    multistart: List[InitStrategy] = Field(default_factory=lambda: ["centroid", "push_w", "push_l"], min_length=1)
    h_fd: float = Field(default=1e-3, gt=0)
    smooth_l1_beta: float = Field(default=1.0, gt=0)
    use_geom: bool = True
    use_ray: bool = True
    use_balancing: bool = True
    use_center_only: bool = False
    adjust_y: bool = True

    @field_validator("class_dims")
    @classmethod
    def _positive_dims(cls, value: Dict[str, Tuple[float, float, float]]):
        for name, dims in value.items():
            if len(dims) != 3 or any(d <= 0 for d in dims):
                raise ValueError(f"dimensions for {name} must be three positive numbers, got {dims}")
        return value

    def loss_config(self) -> LossConfig:
        """The loss settings implied by the weights and toggles."""
        return LossConfig(
            R=self.R,
            lam=self.lam,
            w_geom=1.0 if self.use_geom else 0.0,
            w_ray=1.0 if self.use_ray else 0.0,
            smooth_l1_beta=self.smooth_l1_beta,
            h_fd=self.h_fd,
            balance=self.use_balancing,
            center_only=self.use_center_only,
        )
