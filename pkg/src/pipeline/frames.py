"""
Frame Tasks

A FrameTask carries everything one worker needs to process one frame
(file paths, the frame's detections and the configuration) so it can be
shipped to another process. process_frame never raises: failures come
back as `success: False` with the error message.
"""

import time
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..fitting import FitConfig, fit_frame, fit_objects
from ..kitti import (
    parse_calib,
    parse_scan,
    read_object_points,
    write_labels,
    write_object_points,
)
from ..pointcloud import CameraModel, Detection2D, ExtractionConfig, SkipRecord, extract_objects
from ..utils.errors import REASON_BAD_DETECTION, REASON_NO_POINTS, WeakBoxError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class FrameTask(BaseModel):
    """
    One unit of work.

    Attributes:
        frame_id: KITTI frame id
        command: "extract" writes object points, "fit" writes labels
        calib_path: calibration file
        scan_path: velodyne file (extract, or fit from scans)
        points_path: object point file (fit from extracted points)
        detections: the frame's detections in file order
        out_path: output file
        fit: fitter settings
        extraction: extraction settings
        seed: run seed
    """

    model_config = ConfigDict(frozen=True)

    frame_id: str
    command: Literal["extract", "fit"]
    calib_path: str
    scan_path: Optional[str] = None
    points_path: Optional[str] = None
    detections: List[Detection2D] = Field(default_factory=list)
    out_path: str
    fit: FitConfig = Field(default_factory=FitConfig)
    extraction: ExtractionConfig = Field(default_factory=ExtractionConfig)
    seed: int = 0


def _missing_point_skips(task: FrameTask, objects, cam: CameraModel) -> List[SkipRecord]:
    skips = []
    for idx, (obj, det) in enumerate(zip(objects, task.detections)):
        if obj is not None:
            continue
        problem = det.problem(cam.image_size)
        if problem is not None:
            reason, message = REASON_BAD_DETECTION, problem
        else:
            reason, message = REASON_NO_POINTS, "no extracted points for this detection"
        skips.append(SkipRecord(frame_id=task.frame_id, det_index=idx, cls=det.cls,
                                reason=reason, message=message))
    return skips


def run_extract(task: FrameTask):
    cam = parse_calib(task.calib_path)
    scan = parse_scan(task.scan_path)
    objects, skips = extract_objects(scan, cam, task.detections, task.extraction, task.seed)
    written = write_object_points(task.out_path, objects)
    return written, skips


def run_fit(task: FrameTask):
    cam = parse_calib(task.calib_path)
    if task.points_path is not None:
        objects = read_object_points(task.points_path, len(task.detections), task.fit.R)
        results, skips = fit_objects(objects, task.detections, cam, task.fit)
        skips = sorted(skips + _missing_point_skips(task, objects, cam), key=lambda s: s.det_index)
    else:
        scan = parse_scan(task.scan_path)
        results, skips = fit_frame(scan, cam, task.detections, task.fit, task.extraction, task.seed)
    write_labels(task.out_path, [r.to_kitti_label() for r in results])
    return len(results), skips


def process_frame(task: FrameTask) -> Dict[str, Any]:
    """
    Process one frame and write its output file.

    Args:
        task: the frame task

    Returns:
        Dictionary with frame_id, success, n_outputs, skips, error, output and seconds
    """
    result: Dict[str, Any] = {
        "frame_id": task.frame_id,
        "success": False,
        "n_outputs": 0,
        "skips": [],
        "error": None,
        "output": None,
        "seconds": 0.0,
    }
    start = time.time()
    try:
        Path(task.out_path).parent.mkdir(parents=True, exist_ok=True)
        if task.command == "extract":
            n_outputs, skips = run_extract(task)
        else:
            n_outputs, skips = run_fit(task)
        result["n_outputs"] = n_outputs
        result["skips"] = [s.model_dump() for s in skips]
        result["output"] = task.out_path
        result["success"] = True
    except (WeakBoxError, OSError, ValueError) as e:
        result["error"] = str(e)
        logger.error(f"[Frame {task.frame_id}] Failed: {e}")
    result["seconds"] = time.time() - start
    return result
