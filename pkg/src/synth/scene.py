"""
Synthetic LiDAR Scenes

Boxes standing on a flat ground, seen by a horizontal ray fan from the
camera center. Each ray keeps only its nearest box hit, so self-occlusion
and occlusion between objects come out exactly. Ground points lie on a
regular grid in front of the camera.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..geometry import Box3D, bev_intersection_area, bev_rect_of, ray_rect_hits
from ..pointcloud import CameraModel, RawScan
from ..utils.errors import ConfigError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# LiDAR (x forward, y left, z up) -> camera (x right, y down, z forward)
VELO_TO_CAM = np.array([
    [0.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])

CAR_DIMS = (1.6, 1.8, 4.0)

GROUND_STEP = 0.5
GROUND_DEPTH = (2.0, 60.0)

# BEV overlap area (m^2) tolerated between boxes that merely touch
OVERLAP_TOL = 1e-9


class SceneSpec(BaseModel):
    """
    Parameters of a synthetic scene or suite.

    Attributes:
        seed: base seed; frame k uses the generator seeded with [seed, k]
        noise_sigma: isotropic Gaussian point noise (m)
        ground_height: camera-frame y of the ground (m)
        fan_resolution_deg: horizontal angle between rays
        elevation_rows: scan rows spread through the shortest box's height
        n_frames: frames to generate
        random_boxes: random Car boxes added per frame
        z_range: depth range of random boxes (m)
        image_width, image_height, focal: pinhole camera
        boxes: fixed boxes present in every frame
        classes: category of each fixed box
    """

    model_config = ConfigDict(frozen=True)

    seed: int = 0
    noise_sigma: float = Field(default=0.02, ge=0)
    ground_height: float = Field(default=1.65, gt=0)
    fan_resolution_deg: float = Field(default=0.2, gt=0)
    elevation_rows: int = Field(default=2, ge=1)
    n_frames: int = Field(default=1, ge=1)
    random_boxes: int = Field(default=0, ge=0)
    z_range: Tuple[float, float] = (8.0, 40.0)
    image_width: int = Field(default=1242, gt=0)
    image_height: int = Field(default=375, gt=0)
    focal: float = Field(default=721.5377, gt=0)
    boxes: List[Box3D] = Field(default_factory=list)
    classes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _aligned(self) -> "SceneSpec":
        if self.z_range[0] >= self.z_range[1]:
            raise ValueError(f"z_range must be increasing, got {self.z_range}")
        if self.classes and len(self.classes) != len(self.boxes):
            raise ValueError("classes must list one category per box")
        return self

    def camera(self) -> CameraModel:
        return CameraModel(
            f_x=self.focal, f_y=self.focal,
            c_x=self.image_width / 2.0, c_y=self.image_height / 2.0,
            extrinsic=VELO_TO_CAM, image_size=(self.image_width, self.image_height),
        )

    @property
    def half_fov(self) -> float:
        return math.atan((self.image_width / 2.0) / self.focal)


SPEC_KEYS = {
    "seed": int,
    "noise_sigma": float,
    "ground_height": float,
    "fan_resolution_deg": float,
    "elevation_rows": int,
    "n_frames": int,
    "random_boxes": int,
    "image_width": int,
    "image_height": int,
    "focal": float,
}


def parse_scene_spec(text: str, base: Optional[SceneSpec] = None) -> SceneSpec:
    """
    Parse a `key = value` scene description.

    Boxes are repeated `box = x,y,z,h,w,l,theta[,class]` lines (y at the
    bottom face); `z_range = near,far`; `#` starts a comment. Keys missing
    from the text keep their value in `base`; boxes in the text replace
    the boxes of `base`.

    Raises:
        ConfigError: unknown key or malformed value, with the line number
    """
    values = {}
    boxes: List[Box3D] = []
    classes: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        try:
            if key == "box":
                parts = [p.strip() for p in value.split(",")]
                if len(parts) not in (7, 8):
                    raise ValueError(f"box needs 7 numbers and an optional class, got {len(parts)} items")
                x, y, z, h, w, l, theta = (float(p) for p in parts[:7])
                boxes.append(Box3D(x=x, y=y, z=z, h=h, w=w, l=l, theta_y=theta))
                classes.append(parts[7] if len(parts) == 8 else "Car")
            elif key == "z_range":
                near, far = (float(p) for p in value.split(","))
                values["z_range"] = (near, far)
            elif key in SPEC_KEYS:
                values[key] = SPEC_KEYS[key](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"line {lineno}: {e}") from e
    merged = base.model_dump() if base is not None else {}
    merged.update(values)
    if boxes:
        merged["boxes"], merged["classes"] = boxes, classes
    try:
        return SceneSpec(**merged)
    except ValueError as e:
        raise ConfigError(f"invalid scene spec: {e}") from e


class SynthScene(BaseModel):
    """
    A generated frame.

    Attributes:
        gt_boxes: ground-truth boxes
        classes: category per box
        cam: camera model (LiDAR frame = rotated camera frame, same origin)
        points: (N, 3) camera-frame points with noise
        clean: (N, 3) the same points before noise
        labels: (N,) index of the source box, -1 for ground
        ground_height, noise_sigma, seed: generation parameters
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gt_boxes: List[Box3D]
    classes: List[str]
    cam: CameraModel
    points: np.ndarray
    clean: np.ndarray
    labels: np.ndarray
    ground_height: float
    noise_sigma: float
    seed: int

    def object_points(self, index: int, clean: bool = False) -> np.ndarray:
        """Points generated on box `index`."""
        source = self.clean if clean else self.points
        return source[self.labels == index]

    def raw_scan(self) -> RawScan:
        """The points in the LiDAR frame with zero reflectance."""
        rot = self.cam.extrinsic[:3, :3]
        trans = self.cam.extrinsic[:3, 3]
        lidar = (self.points - trans) @ rot
        return RawScan(points=np.column_stack([lidar, np.zeros(len(lidar))]))


def row_heights(boxes: Sequence[Box3D], ground_height: float, n_rows: int) -> np.ndarray:
    """Camera-frame y of each scan row, evenly inside the shortest box's height."""
    span = min((b.h for b in boxes), default=1.5)
    return np.array([ground_height - span * (k + 1) / (n_rows + 1) for k in range(n_rows)])


def fan_directions(half_fov: float, resolution_deg: float) -> np.ndarray:
    """Unit BEV directions (sin phi, cos phi) across the field of view."""
    phis = np.arange(-half_fov, half_fov, math.radians(resolution_deg))
    return np.column_stack([np.sin(phis), np.cos(phis)])


def first_hits(dirs: np.ndarray, boxes: Sequence[Box3D], y: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nearest box hit of every camera ray at one row height.

    Returns:
        (t, owner): hit distance and box index per ray; owner -1 on a miss
    """
    t_best = np.full(len(dirs), np.inf)
    owner = np.full(len(dirs), -1, dtype=np.int64)
    origin = np.zeros(2)
    for idx, box in enumerate(boxes):
        if not (box.y - box.h <= y <= box.y):
            continue
        slab = ray_rect_hits(origin, dirs, bev_rect_of(box))
        t = np.where(slab.inside | (slab.t_near < 0.0), slab.t_far, slab.t_near)
        closer = slab.hit & (t > 0.0) & (t < t_best)
        t_best[closer] = t[closer]
        owner[closer] = idx
    return t_best, owner


def check_boxes(boxes: Sequence[Box3D]) -> None:
    """
    Reject boxes that are not in front of the camera or overlap in BEV.

    Raises:
        ValueError: on the first offending box or pair
    """
    for idx, box in enumerate(boxes):
        if box.z <= box.l:
            raise ValueError(f"box {idx} at z={box.z} is not in front of the camera (z must exceed l={box.l})")
    rects = [bev_rect_of(b) for b in boxes]
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if bev_intersection_area(rects[i], rects[j]) > OVERLAP_TOL:
                raise ValueError(f"boxes {i} and {j} overlap")


def ground_grid(boxes: Sequence[Box3D], ground_height: float, half_fov: float) -> np.ndarray:
    """Ground points on a regular grid inside the field of view, skipping box footprints."""
    zs = np.arange(GROUND_DEPTH[0], GROUND_DEPTH[1] + 1e-9, GROUND_STEP)
    reach = math.tan(half_fov) * GROUND_DEPTH[1]
    xs = np.arange(-reach, reach + 1e-9, GROUND_STEP)
    gx, gz = np.meshgrid(xs, zs)
    bev = np.column_stack([gx.ravel(), gz.ravel()])
    keep = np.abs(bev[:, 0]) <= bev[:, 1] * math.tan(half_fov)
    for box in boxes:
        keep &= ~bev_rect_of(box).contains(bev)
    bev = bev[keep]
    return np.column_stack([bev[:, 0], np.full(len(bev), ground_height), bev[:, 1]])


def random_scene_boxes(
    rng: np.random.Generator,
    n: int,
    z_range: Tuple[float, float] = (8.0, 40.0),
    dims: Tuple[float, float, float] = CAR_DIMS,
    ground_height: float = 1.65,
    half_fov: float = math.atan(621.0 / 721.5377),
    existing: Sequence[Box3D] = (),
    max_attempts: int = 1000
) -> List[Box3D]:
    """
    Draw n non-overlapping boxes inside the field of view.

    Args:
        rng: random generator
        n: number of boxes
        z_range: depth range of centers
        dims: (h, w, l)
        ground_height: bottom-face y
        half_fov: half horizontal field of view (rad)
        existing: boxes the new ones must not overlap
        max_attempts: draws before giving up

    Returns:
        The new boxes

    Raises:
        ValueError: could not place n boxes
    """
    h, w, l = dims
    placed: List[Box3D] = []
    attempts = 0
    while len(placed) < n:
        attempts += 1
        if attempts > max_attempts:
            raise ValueError(f"could not place {n} boxes in {max_attempts} attempts")
        z = float(rng.uniform(max(z_range[0], l + 0.5), z_range[1]))
        reach = 0.8 * z * math.tan(half_fov)
        x = float(rng.uniform(-reach, reach))
        theta = float(rng.uniform(-math.pi, math.pi))
        box = Box3D(x=x, y=ground_height, z=z, h=h, w=w, l=l, theta_y=theta)
        rect = bev_rect_of(box)
        if any(bev_intersection_area(rect, bev_rect_of(b)) > OVERLAP_TOL for b in list(existing) + placed):
            continue
        placed.append(box)
    return placed


def generate_scene(
    spec: Optional[SceneSpec] = None,
    seed: Optional[int] = None,
    boxes: Optional[Sequence[Box3D]] = None,
    classes: Optional[Sequence[str]] = None,
    frame_index: int = 0
) -> SynthScene:
    """
    Ray-cast one synthetic frame.

    Args:
        spec: scene parameters
        seed: overrides spec.seed
        boxes: overrides spec.boxes
        classes: categories of `boxes` (Car by default)
        frame_index: frame number within a suite, mixed into the seed

    Returns:
        SynthScene

    Raises:
        ValueError: a box is not in front of the camera or two boxes overlap
    """
    spec = spec or SceneSpec()
    seed = spec.seed if seed is None else int(seed)
    rng = np.random.default_rng([seed, frame_index])

    if boxes is None:
        boxes = list(spec.boxes)
        classes = list(spec.classes) or ["Car"] * len(boxes)
    else:
        boxes = list(boxes)
        classes = list(classes) if classes is not None else ["Car"] * len(boxes)
    if spec.random_boxes:
        extra = random_scene_boxes(rng, spec.random_boxes, spec.z_range,
                                   ground_height=spec.ground_height, half_fov=spec.half_fov,
                                   existing=boxes)
        boxes += extra
        classes += ["Car"] * len(extra)
    check_boxes(boxes)

    dirs = fan_directions(spec.half_fov, spec.fan_resolution_deg)
    clean_parts, label_parts = [], []
    for y in row_heights(boxes, spec.ground_height, spec.elevation_rows):
        t, owner = first_hits(dirs, boxes, y)
        hit = owner >= 0
        bev = dirs[hit] * t[hit, None]
        clean_parts.append(np.column_stack([bev[:, 0], np.full(len(bev), y), bev[:, 1]]))
        label_parts.append(owner[hit])

    ground = ground_grid(boxes, spec.ground_height, spec.half_fov)
    clean_parts.append(ground)
    label_parts.append(np.full(len(ground), -1, dtype=np.int64))
    clean = np.vstack(clean_parts)
    labels = np.concatenate(label_parts)

    points = clean.copy()
    if spec.noise_sigma > 0:
        points = points + rng.normal(0.0, spec.noise_sigma, size=points.shape)

    logger.debug(f"synthetic frame {frame_index}: {len(boxes)} boxes, "
                 f"{int((labels >= 0).sum())} object points, {len(ground)} ground points")
    return SynthScene(
        gt_boxes=boxes,
        classes=classes,
        cam=spec.camera(),
        points=points,
        clean=clean,
        labels=labels,
        ground_height=spec.ground_height,
        noise_sigma=spec.noise_sigma,
        seed=seed,
    )
