"""
Object point files written by the extraction command.

One text file per frame, header-less rows `obj_idx x y z` (camera frame,
%.6f), where obj_idx is the detection's position in its frame.
"""

from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..pointcloud import ObjectPoints
from ..utils.errors import KittiFormatError

PathLike = Union[str, Path]


def write_object_points(path: PathLike, objects: List[Optional[ObjectPoints]]) -> int:
    """
    Write the points of every extracted object; skipped detections write nothing.

    Returns:
        Number of objects written
    """
    lines = []
    written = 0
    for idx, obj in enumerate(objects):
        if obj is None:
            continue
        written += 1
        for x, y, z in obj.pts3d:
            lines.append(f"{idx:d} {x:.6f} {y:.6f} {z:.6f}\n")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("".join(lines))
    return written


def read_object_points(path: PathLike, n_detections: int, R: float = 0.4) -> List[Optional[ObjectPoints]]:
    """
    Read a point file back into per-detection objects.

    Args:
        path: point file
        n_detections: detections in the frame
        R: density radius for the rebuilt objects

    Returns:
        List aligned with the detections, None where no points were written

    Raises:
        KittiFormatError: malformed row or object index out of range
    """
    rows: dict = {}
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise KittiFormatError(f"expected 'obj_idx x y z', got {len(parts)} fields", str(path), lineno)
            try:
                idx = int(parts[0])
                xyz = [float(v) for v in parts[1:]]
            except ValueError as e:
                raise KittiFormatError(f"bad value: {e}", str(path), lineno) from e
            if not 0 <= idx < n_detections:
                raise KittiFormatError(f"object index {idx} outside 0..{n_detections - 1}", str(path), lineno)
            rows.setdefault(idx, []).append(xyz)
    return [ObjectPoints.from_points(np.array(rows[i]), R) if i in rows else None
            for i in range(n_detections)]
