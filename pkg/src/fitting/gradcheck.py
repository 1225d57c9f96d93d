"""
Gradient Consistency Check

Compares the loss-report gradients (central differences at h_fd) with
Richardson-extrapolated differences on random synthetic configurations
whose point-to-edge assignment is locally constant.
"""

import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry import Box3D
from ..losses import (
    LossConfig,
    balancing_objective,
    is_assignment_stable,
    richardson_gradient,
    total_loss,
)
from ..pointcloud import ObjectPoints
from ..synth import SceneSpec, generate_scene
from ..utils.logger import get_logger
from .config import DEFAULT_CLASS_DIMS

logger = get_logger(__name__)


class GradCheckConfig(BaseModel):
    """
    Attributes:
        n_configs: assignment-stable configurations to check
        max_attempts: draws before giving up on reaching n_configs
        tolerance: max relative error that passes
        grad_floor: gradient norm below which errors are taken as absolute
        perturbation: max offset (m) of the evaluated center from the true one
        noise_sigma: point noise of the synthetic objects (m)
        min_points: configurations with fewer object points are redrawn
    """

    model_config = ConfigDict(frozen=True)

    n_configs: int = Field(default=100, ge=1)
    max_attempts: int = Field(default=2000, ge=1)
    tolerance: float = Field(default=1e-3, gt=0)
    grad_floor: float = Field(default=1e-2, gt=0)
    perturbation: float = Field(default=0.5, ge=0)
    noise_sigma: float = Field(default=0.02, ge=0)
    min_points: int = Field(default=10, ge=2)


class GradCheckReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_rel_error: float
    n_checked: int
    n_unstable: int
    passed: bool
    errors: List[float] = Field(default_factory=list)


def relative_error(grad: np.ndarray, reference: np.ndarray, floor: float) -> float:
    return float(np.linalg.norm(grad - reference) / max(np.linalg.norm(reference), floor))


def gradcheck(cfg: Optional[GradCheckConfig] = None, seed: int = 0,
              loss_cfg: Optional[LossConfig] = None) -> GradCheckReport:
    """
    Run the finite-difference consistency suite.

    Args:
        cfg: suite settings
        seed: random seed
        loss_cfg: loss settings (h_fd is the step under test)

    Returns:
        GradCheckReport; passed when every checked error is below cfg.tolerance
    """
    cfg = cfg or GradCheckConfig()
    loss_cfg = loss_cfg or LossConfig()
    rng = np.random.default_rng(seed)
    spec = SceneSpec(noise_sigma=cfg.noise_sigma)
    h, w, l = DEFAULT_CLASS_DIMS["Car"]

    errors: List[float] = []
    unstable = 0
    attempts = 0
    while len(errors) < cfg.n_configs and attempts < cfg.max_attempts:
        attempts += 1
        z = float(rng.uniform(8.0, 30.0))
        x = float(z * math.tan(rng.uniform(-0.5, 0.5)))
        gt = Box3D(x=x, y=spec.ground_height, z=z, h=h, w=w, l=l,
                   theta_y=float(rng.uniform(-math.pi, math.pi)))
        scene = generate_scene(spec, seed=int(rng.integers(2 ** 31)), boxes=[gt])
        obj = scene.object_points(0)
        if len(obj) < cfg.min_points:
            continue
        pts = ObjectPoints.from_points(obj, loss_cfg.R)

        offset = rng.uniform(-cfg.perturbation, cfg.perturbation, size=2)
        box = gt.model_copy(update={"x": gt.x + float(offset[0]), "z": gt.z + float(offset[1])})
        if not is_assignment_stable(pts, box, loss_cfg.h_fd):
            unstable += 1
            continue

        report = total_loss(pts, box, loss_cfg)
        reference = richardson_gradient(balancing_objective(pts, box, loss_cfg), box.x, box.z, loss_cfg.h_fd)
        errors.append(relative_error(np.array([report.grad_x, report.grad_z]), np.array(reference), cfg.grad_floor))

    if len(errors) < cfg.n_configs:
        logger.warning(f"gradcheck: only {len(errors)}/{cfg.n_configs} stable configurations "
                       f"in {attempts} attempts")
    max_err = max(errors) if errors else math.inf
    passed = bool(errors) and max_err < cfg.tolerance
    logger.info(f"gradcheck: {len(errors)} configurations, {unstable} unstable skipped, "
                f"max relative error {max_err:.3e} ({'PASS' if passed else 'FAIL'})")
    return GradCheckReport(max_rel_error=max_err, n_checked=len(errors), n_unstable=unstable,
                           passed=passed, errors=errors)
