"""
Geometric Value Types

Camera-frame 3D boxes and their bird's-eye-view (BEV) footprints.

Conventions (KITTI):
    - camera frame: x right, y down, z forward
    - BEV plane: (x, z)
    - yaw theta_y rotates about the camera y axis; the box's local length
      axis maps to the BEV direction (cos theta, -sin theta) and the local
      width axis to (sin theta, cos theta)
    - Box3D.y is the bottom-face center height
"""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi); angles already in range are returned untouched."""
    if -math.pi <= theta < math.pi:
        return float(theta)
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    wrapped -= math.pi
    # fmod can land exactly on +pi through rounding
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


def length_axis(theta: float) -> Tuple[float, float]:
    """BEV unit vector of the box length axis for yaw theta."""
    return math.cos(theta), -math.sin(theta)


def width_axis(theta: float) -> Tuple[float, float]:
    """BEV unit vector of the box width axis for yaw theta."""
    return math.sin(theta), math.cos(theta)


class Vec2BEV(BaseModel):
    """A point or direction in the BEV (x, z) plane, in meters."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(allow_inf_nan=False)
    z: float = Field(allow_inf_nan=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z], dtype=float)

    def norm(self) -> float:
        return math.hypot(self.x, self.z)


class Box3D(BaseModel):
    """
    Oriented 3D box in the rectified camera frame.

    Attributes:
        x, y, z: location in meters; y is the bottom-face center
        h, w, l: dimensions in meters
        theta_y: global yaw in radians, normalized to [-pi, pi)
    """

    model_config = ConfigDict(frozen=True)

    x: float = Field(allow_inf_nan=False)
    y: float = Field(allow_inf_nan=False)
    z: float = Field(allow_inf_nan=False)
    h: float = Field(gt=0, allow_inf_nan=False)
    w: float = Field(gt=0, allow_inf_nan=False)
    l: float = Field(gt=0, allow_inf_nan=False)
    theta_y: float = Field(default=0.0, allow_inf_nan=False)

    @field_validator("theta_y")
    @classmethod
    def _wrap_theta(cls, value: float) -> float:
        return normalize_angle(value)

    @property
    def center_y(self) -> float:
        """Geometric center height (camera y points down)."""
        return self.y - self.h / 2.0

    @property
    def bev_center(self) -> Vec2BEV:
        return Vec2BEV(x=self.x, z=self.z)

    @property
    def volume(self) -> float:
        return self.h * self.w * self.l

    def corners(self) -> np.ndarray:
        """
        The 8 box corners in camera coordinates, shape (8, 3).

        Rows 0-3 are the bottom face (y = self.y), rows 4-7 the top face.
        """
        bev = bev_rect_of(self).corners()
        bottom = np.column_stack([bev[:, 0], np.full(4, self.y), bev[:, 1]])
        top = bottom.copy()
        top[:, 1] = self.y - self.h
        return np.vstack([bottom, top])


class BevRect(BaseModel):
    """Rotated rectangle in the BEV plane (the footprint of a Box3D)."""

    model_config = ConfigDict(frozen=True)

    center: Vec2BEV
    half_l: float = Field(gt=0, allow_inf_nan=False)
    half_w: float = Field(gt=0, allow_inf_nan=False)
    theta: float = Field(default=0.0, allow_inf_nan=False)

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Unit length and width axes in BEV."""
        return np.array(length_axis(self.theta)), np.array(width_axis(self.theta))

    def corners(self) -> np.ndarray:
        """
        Corners as a (4, 2) array of (x, z), counter-clockwise in the (x, z) plane.
        """
        e_l, e_w = self.axes()
        c = self.center.as_array()
        signs = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
        pts = np.array([c + sl * self.half_l * e_l + sw * self.half_w * e_w for sl, sw in signs])
        if _signed_area(pts) < 0:
            pts = pts[::-1].copy()
        return pts

    def area(self) -> float:
        return 4.0 * self.half_l * self.half_w

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        """Express BEV points (N, 2) in the rectangle's (length, width) frame."""
        e_l, e_w = self.axes()
        d = np.asarray(pts, dtype=float) - self.center.as_array()
        return np.column_stack([d @ e_l, d @ e_w])

    def contains(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of BEV points inside (or within tol of) the rectangle."""
        local = self.to_local(np.atleast_2d(pts))
        return (np.abs(local[:, 0]) <= self.half_l + tol) & (np.abs(local[:, 1]) <= self.half_w + tol)


class RaySegment(BaseModel):
    """A BEV half-line: origin + t * direction for t >= 0, with a unit direction."""

    model_config = ConfigDict(frozen=True)

    origin: Vec2BEV
    direction: Vec2BEV

    @field_validator("direction")
    @classmethod
    def _unit_direction(cls, value: Vec2BEV) -> Vec2BEV:
        n = value.norm()
        if n <= 1e-12:
            raise ValueError("ray direction must be non-zero")
        if abs(n - 1.0) > 1e-12:
            return Vec2BEV(x=value.x / n, z=value.z / n)
        return value

    @classmethod
    def through(cls, origin: Vec2BEV, target: Vec2BEV) -> "RaySegment":
        """Ray from origin through target; rejects origin == target."""
        dx, dz = target.x - origin.x, target.z - origin.z
        if math.hypot(dx, dz) <= 1e-12:
            raise ValueError("degenerate ray: origin coincides with target")
        return cls(origin=origin, direction=Vec2BEV(x=dx, z=dz))


def _signed_area(poly: np.ndarray) -> float:
    x, z = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(z, -1)) - np.dot(np.roll(x, -1), z))


def polygon_area(poly: np.ndarray) -> float:
    """Unsigned shoelace area of a simple polygon given as (N, 2)."""
    if len(poly) < 3:
        return 0.0
    return abs(_signed_area(np.asarray(poly, dtype=float)))


def bev_rect_of(box: Box3D) -> BevRect:
    """Project a Box3D to its BEV footprint."""
    return BevRect(
        center=Vec2BEV(x=box.x, z=box.z),
        half_l=box.l / 2.0,
        half_w=box.w / 2.0,
        theta=box.theta_y,
    )


def corner_set(rect: BevRect, decimals: int = 9) -> List[Tuple[float, float]]:
    """Sorted, rounded corner tuples; handy for comparing footprints as sets."""
    return sorted((round(float(x), decimals) + 0.0, round(float(z), decimals) + 0.0)
                  for x, z in rect.corners())
