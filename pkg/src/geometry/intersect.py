"""
Ray / rectangle intersection in the BEV plane (slab method).

`ray_rect_hits` is the vectorized core used by the loss functions;
`ray_rect_intersect` is the single-ray convenience wrapper.
"""

from typing import List, NamedTuple

import numpy as np

from .types import BevRect, RaySegment, Vec2BEV

# Parameter gap below which entry and exit collapse into one tangent hit
TANGENT_TOL = 1e-12
_PARALLEL_EPS = 1e-15


class SlabHits(NamedTuple):
    """
    Per-ray slab intersection results.

    Attributes:
        t_near: entry parameter (may be negative when the origin is inside)
        t_far: exit parameter
        hit: the half-line t >= 0 touches the rectangle
        inside: origin strictly inside the rectangle
    """
    t_near: np.ndarray
    t_far: np.ndarray
    hit: np.ndarray
    inside: np.ndarray


def ray_rect_hits(origins: np.ndarray, directions: np.ndarray, rect: BevRect) -> SlabHits:
    """
    Intersect N rays with one rectangle.

    Args:
        origins: (N, 2) or (2,) ray origins in BEV
        directions: (N, 2) unit directions in BEV
        rect: the rectangle

    Returns:
        SlabHits with arrays of shape (N,)
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    origins = np.broadcast_to(np.asarray(origins, dtype=float), directions.shape)

    e_l, e_w = rect.axes()
    rel = origins - rect.center.as_array()
    o_local = np.column_stack([rel @ e_l, rel @ e_w])
    d_local = np.column_stack([directions @ e_l, directions @ e_w])
    half = np.array([rect.half_l, rect.half_w])

    n = directions.shape[0]
    t_near = np.full(n, -np.inf)
    t_far = np.full(n, np.inf)
    valid = np.ones(n, dtype=bool)

    for axis in range(2):
        o = o_local[:, axis]
        d = d_local[:, axis]
        parallel = np.abs(d) < _PARALLEL_EPS
        # parallel rays outside the slab never hit
        valid &= ~(parallel & (np.abs(o) > half[axis]))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-half[axis] - o) / d
            t2 = (half[axis] - o) / d
        lo = np.where(parallel, -np.inf, np.minimum(t1, t2))
        hi = np.where(parallel, np.inf, np.maximum(t1, t2))
        t_near = np.maximum(t_near, lo)
        t_far = np.minimum(t_far, hi)

    hit = valid & (t_far >= t_near) & (t_far >= 0.0)
    inside = (np.abs(o_local[:, 0]) < half[0]) & (np.abs(o_local[:, 1]) < half[1])
    return SlabHits(t_near=t_near, t_far=t_far, hit=hit, inside=inside)


def ray_rect_intersect(ray: RaySegment, rect: BevRect) -> List[Vec2BEV]:
    """
    Boundary hits of a half-line with a rectangle, sorted by distance.

    An origin strictly inside yields exactly one (exit) hit; an outside
    origin yields zero or two hits, collapsing to one on tangency.

    Args:
        ray: the half-line
        rect: the rectangle

    Returns:
        Ordered list of 0-2 hit points
    """
    o = ray.origin.as_array()
    d = ray.direction.as_array()
    slab = ray_rect_hits(o, d, rect)
    if not slab.hit[0]:
        return []

    t_near, t_far = float(slab.t_near[0]), float(slab.t_far[0])
    if slab.inside[0] or t_near < 0.0:
        ts = [t_far]
    elif t_far - t_near <= TANGENT_TOL:
        ts = [t_near]
    else:
        ts = [t_near, t_far]

    hits = []
    for t in ts:
        p = o + t * d
        hits.append(Vec2BEV(x=float(p[0]), z=float(p[1])))
    return hits
