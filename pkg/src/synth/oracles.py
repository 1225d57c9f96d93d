"""
Brute-Force Oracles

Exhaustive loss evaluation over a BEV grid of box centers and rasterized
rectangle IoU. Slow on purpose; they check the fast code paths.
"""

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..geometry import BevRect, Box3D
from ..losses import LossConfig, balanced_loss, loc_y_loss, orient_loss, with_center
from ..pointcloud import ObjectPoints

DEFAULT_WINDOW = 4.0
DEFAULT_STEP = 0.05


class GridOracleResult(BaseModel):
    """
    Loss surface over box centers.

    Attributes:
        xs, zs: grid coordinates
        surface: (len(zs), len(xs)) total loss, surface[i, j] at (xs[j], zs[i])
        argmin: (x, z) of the smallest value (first in row-major order on ties)
        min_value: the smallest value
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    xs: np.ndarray
    zs: np.ndarray
    surface: np.ndarray
    argmin: Tuple[float, float]
    min_value: float

    def value_at(self, x: float, z: float) -> float:
        """Surface value at the grid node nearest to (x, z)."""
        j = int(np.argmin(np.abs(self.xs - x)))
        i = int(np.argmin(np.abs(self.zs - z)))
        return float(self.surface[i, j])


def grid_axis(center: float, window: float, step: float) -> np.ndarray:
    n = int(round(window / step)) + 1
    return center + (np.arange(n) - (n - 1) / 2.0) * step


def grid_oracle(
    pts: ObjectPoints,
    box: Box3D,
    cfg: Optional[LossConfig] = None,
    window: float = DEFAULT_WINDOW,
    step: float = DEFAULT_STEP,
    center: Optional[Tuple[float, float]] = None,
    theta_target: Optional[float] = None
) -> GridOracleResult:
    """
    Evaluate the total loss for every box center on a square grid.

    Only x and z of `box` vary; y, yaw and dimensions are kept, so the
    y-location and orientation terms are constant over the grid.

    Args:
        pts: object points
        box: template box
        cfg: loss settings
        window: side of the square window (m)
        step: grid spacing (m)
        center: window center, the points' BEV centroid by default
        theta_target: orientation target for the constant orientation term

    Returns:
        GridOracleResult
    """
    cfg = cfg or LossConfig()
    if center is None:
        centroid = np.mean(pts.bev, axis=0)
        center = (float(centroid[0]), float(centroid[1]))
    xs = grid_axis(center[0], window, step)
    zs = grid_axis(center[1], window, step)

    target = box.theta_y if theta_target is None else theta_target
    constant = loc_y_loss(pts, box, cfg) + orient_loss(box.theta_y, target)
    surface = np.empty((len(zs), len(xs)))
    for i, z in enumerate(zs):
        for j, x in enumerate(xs):
            surface[i, j] = balanced_loss(pts, with_center(box, x, z), cfg)[0] + constant

    flat = int(np.argmin(surface))
    i, j = np.unravel_index(flat, surface.shape)
    return GridOracleResult(
        xs=xs, zs=zs, surface=surface,
        argmin=(float(xs[j]), float(zs[i])),
        min_value=float(surface[i, j]),
    )


def split_minima(result: GridOracleResult, anchor: Tuple[float, float],
                 normal: Tuple[float, float]) -> Tuple[float, float]:
    """
    Smallest surface value on each side of a line.

    Args:
        result: grid oracle output
        anchor: a point on the line
        normal: line normal; the first value is taken where (p - anchor) . normal < 0

    Returns:
        (min on the negative side, min on the positive side)
    """
    gx, gz = np.meshgrid(result.xs, result.zs)
    side = (gx - anchor[0]) * normal[0] + (gz - anchor[1]) * normal[1]
    neg = result.surface[side < 0]
    pos = result.surface[side > 0]
    return (float(neg.min()) if neg.size else np.inf, float(pos.min()) if pos.size else np.inf)


def relative_gap(a: float, b: float) -> float:
    """|a - b| relative to the smaller of the two."""
    low = min(a, b)
    if low <= 0:
        return np.inf if a != b else 0.0
    return abs(a - b) / low


def rasterized_iou_oracle(a: BevRect, b: BevRect, cell: float = 0.001, chunk_rows: int = 256) -> float:
    """
    Approximate IoU by counting cell centers inside each rectangle.

    Args:
        a, b: rectangles
        cell: cell size (m)
        chunk_rows: grid rows evaluated per batch

    Returns:
        Approximate IoU in [0, 1]
    """
    corners = np.vstack([a.corners(), b.corners()])
    lo = corners.min(axis=0)
    hi = corners.max(axis=0)
    xs = np.arange(lo[0] + cell / 2.0, hi[0], cell)
    zs = np.arange(lo[1] + cell / 2.0, hi[1], cell)

    inter = 0
    union = 0
    for start in range(0, len(zs), chunk_rows):
        gx, gz = np.meshgrid(xs, zs[start:start + chunk_rows])
        pts = np.column_stack([gx.ravel(), gz.ravel()])
        in_a = a.contains(pts)
        in_b = b.contains(pts)
        inter += int(np.count_nonzero(in_a & in_b))
        union += int(np.count_nonzero(in_a | in_b))
    return inter / union if union else 0.0
