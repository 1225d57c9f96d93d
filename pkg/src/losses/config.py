"""
Loss hyperparameters.
"""

from pydantic import BaseModel, ConfigDict, Field


class LossConfig(BaseModel):
    """
    Coefficients of the balanced point-wise objective.

    Attributes:
        R: density radius in meters
        lam: weight of the center regularizer (config key "lambda")
        w_geom: weight of the geometric alignment term
        w_ray: weight of the ray tracing term
        smooth_l1_beta: Smooth-L1 threshold of the y-location loss (m)
        h_fd: finite-difference step for gradients (m)
        balance: divide point-wise losses by densities
        center_only: replace the point-wise terms by the bare center loss
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    R: float = Field(default=0.4, gt=0)
    lam: float = Field(default=0.1, ge=0, alias="lambda")
    w_geom: float = Field(default=1.0, ge=0)
    w_ray: float = Field(default=1.0, ge=0)
    smooth_l1_beta: float = Field(default=1.0, gt=0)
    h_fd: float = Field(default=1e-3, gt=0)
    balance: bool = True
    center_only: bool = False
