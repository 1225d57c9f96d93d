"""
Detections CSV

`frame_id,cls,score,x1,y1,x2,y2[,mask_path]`, one detection per row. An
optional header row is recognized by its first cell `frame_id`. Mask paths
are resolved relative to the CSV file; masks are single-channel PNGs where
nonzero pixels belong to the instance.
"""

import csv
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from PIL import Image
from pydantic import ValidationError

from ..pointcloud import Detection2D
from ..utils.errors import KittiFormatError
from ..utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

HEADER = ["frame_id", "cls", "score", "x1", "y1", "x2", "y2", "mask_path"]


def load_mask(path: PathLike) -> np.ndarray:
    """Read an instance mask PNG as a boolean array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L")) != 0


def save_mask(path: PathLike, mask: np.ndarray) -> None:
    """Write a boolean mask as an 8-bit PNG (255 = instance)."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def parse_detections(path: PathLike, strict: bool = True) -> Dict[str, List[Detection2D]]:
    """
    Read the detections file.

    Args:
        path: CSV file
        strict: reject rows whose bbox or score is out of range; when False
            they are kept in place unvalidated (see Detection2D.problem) so
            frame workers can skip them per object

    Returns:
        frame_id -> detections in file order (frames in order of first appearance)

    Raises:
        KittiFormatError: wrong column count or non-numeric values (any mode),
            out-of-range values (strict mode), with the row number
    """
    base = Path(path).parent
    frames: Dict[str, List[Detection2D]] = OrderedDict()
    with open(path, "r", newline="") as f:
        for lineno, row in enumerate(csv.reader(f), 1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if lineno == 1 and row[0].strip() == "frame_id":
                continue
            if len(row) not in (7, 8):
                raise KittiFormatError(f"expected 7 or 8 columns, got {len(row)}", str(path), lineno)
            cells = [cell.strip() for cell in row]
            mask: Optional[np.ndarray] = None
            if len(cells) == 8 and cells[7]:
                mask_path = Path(cells[7])
                if not mask_path.is_absolute():
                    mask_path = base / mask_path
                mask = load_mask(mask_path)
            try:
                fields = dict(
                    frame_id=cells[0],
                    cls=cells[1],
                    score=float(cells[2]),
                    bbox=tuple(float(v) for v in cells[3:7]),
                    mask=mask,
                )
            except ValueError as e:
                raise KittiFormatError(f"invalid detection: {e}", str(path), lineno) from e
            try:
                det = Detection2D(**fields)
            except ValidationError as e:
                if strict:
                    raise KittiFormatError(f"invalid detection: {e}", str(path), lineno) from e
                logger.warning(f"{path}:{lineno}: keeping invalid detection to skip it later")
                # The "cls" field name clashes with model_construct's own cls parameter.
                cls_value = fields.pop("cls")
                det = Detection2D.model_construct(**fields)
                object.__setattr__(det, "__dict__", {
                    name: (cls_value if name == "cls" else det.__dict__[name])
                    for name in Detection2D.model_fields
                })
                det.__pydantic_fields_set__.add("cls")
            frames.setdefault(det.frame_id, []).append(det)
    logger.info(f"Loaded {sum(len(d) for d in frames.values())} detections for {len(frames)} frames from {path}")
    return frames


def write_detections(path: PathLike, detections: List[Detection2D]) -> None:
    """Write detections (without masks) with a header row."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER[:7])
        for det in detections:
            writer.writerow([det.frame_id, det.cls, f"{det.score:.4f}", *(f"{v:.2f}" for v in det.bbox)])
