"""
KITTI export of synthetic frames.

Writes velodyne/, calib/ and label_2/ per frame plus one detections.csv
with the projected ground-truth 2D boxes (score 1.0), so the extraction,
fitting and evaluation commands run on synthetic data unchanged.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..geometry import Box3D
from ..kitti import label_from_box, write_calib, write_detections, write_labels, write_scan
from ..pointcloud import CameraModel, Detection2D, project_points
from ..utils.logger import get_logger
from .scene import SynthScene

logger = get_logger(__name__)

# boxes with fewer points are labeled fully occluded and get no detection
MIN_VISIBLE_POINTS = 15


def projected_bbox(box: Box3D, cam: CameraModel) -> Tuple[Tuple[float, float, float, float], float]:
    """
    Image box of the projected corners, clipped to the image, and the truncation ratio.

    Returns:
        ((x1, y1, x2, y2), truncated)
    """
    uv = project_points(box.corners(), cam)
    x1, y1 = uv.min(axis=0)
    x2, y2 = uv.max(axis=0)
    width, height = cam.image_size
    cx1, cy1 = max(x1, 0.0), max(y1, 0.0)
    cx2, cy2 = min(x2, width - 1.0), min(y2, height - 1.0)
    full = (x2 - x1) * (y2 - y1)
    clipped = max(cx2 - cx1, 0.0) * max(cy2 - cy1, 0.0)
    truncated = float(np.clip(1.0 - clipped / full, 0.0, 1.0)) if full > 0 else 1.0
    return (float(cx1), float(cy1), float(cx2), float(cy2)), truncated


def export_kitti(
    scenes: Sequence[SynthScene],
    out_dir: Union[str, Path],
    start_index: int = 0,
    min_points: int = MIN_VISIBLE_POINTS,
    detections_name: str = "detections.csv"
) -> List[str]:
    """
    Write scenes as a KITTI-style dataset.

    Args:
        scenes: generated frames
        out_dir: dataset root
        start_index: number of the first frame
        min_points: visible points below which a box is labeled occluded and not detected
        detections_name: file name of the detections CSV under out_dir

    Returns:
        Frame ids written
    """
    root = Path(out_dir)
    frame_ids: List[str] = []
    detections: List[Detection2D] = []
    for offset, scene in enumerate(scenes):
        frame_id = f"{start_index + offset:06d}"
        frame_ids.append(frame_id)
        write_scan(root / "velodyne" / f"{frame_id}.bin", scene.raw_scan())
        write_calib(root / "calib" / f"{frame_id}.txt", scene.cam)

        labels = []
        for idx, (box, cls) in enumerate(zip(scene.gt_boxes, scene.classes)):
            bbox, truncated = projected_bbox(box, scene.cam)
            n_visible = int(np.count_nonzero(scene.labels == idx))
            visible = n_visible >= min_points and bbox[2] > bbox[0] and bbox[3] > bbox[1]
            labels.append(label_from_box(box, cls, bbox, truncated=round(truncated, 2),
                                         occluded=0 if visible else 3))
            if visible:
                detections.append(Detection2D(frame_id=frame_id, cls=cls, score=1.0, bbox=bbox))
        write_labels(root / "label_2" / f"{frame_id}.txt", labels)

    write_detections(root / detections_name, detections)
    logger.info(f"✓ Exported {len(frame_ids)} synthetic frames with {len(detections)} detections to {root}")
    return frame_ids
