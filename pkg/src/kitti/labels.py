"""
KITTI Label Files

One object per line: type, truncated, occluded, alpha, 2D bbox, dimensions
(h, w, l), location (x, y, z; y at the bottom face), rotation_y and an
optional score. Floats are written with fixed two-decimal formatting.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..geometry import Box3D, Vec2BEV, normalize_angle
from ..orientation import global_to_local
from ..utils.errors import KittiFormatError
from ..utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

N_FIELDS = 15


class KittiLabel(BaseModel):
    """
    A parsed label line.

    DontCare entries carry KITTI's placeholder values (dimensions -1,
    location -1000) and cannot be turned into a Box3D.
    """

    model_config = ConfigDict(frozen=True)

    type: str = Field(min_length=1)
    truncated: float = Field(ge=-1, le=1)
    occluded: int = Field(ge=-1, le=3)
    alpha: float
    bbox: Tuple[float, float, float, float]
    dimensions: Tuple[float, float, float]
    location: Tuple[float, float, float]
    rotation_y: float
    score: Optional[float] = None

    @property
    def bbox_height(self) -> float:
        return self.bbox[3] - self.bbox[1]

    def to_box3d(self) -> Box3D:
        """Box3D view of the label (dimensions h, w, l; y at the bottom face)."""
        h, w, l = self.dimensions
        x, y, z = self.location
        return Box3D(x=x, y=y, z=z, h=h, w=w, l=l, theta_y=self.rotation_y)

    def to_line(self) -> str:
        """Serialize with fixed %.2f formatting."""
        fields = [
            self.type,
            f"{self.truncated:.2f}",
            f"{self.occluded:d}",
            f"{self.alpha:.2f}",
            *(f"{v:.2f}" for v in self.bbox),
            *(f"{v:.2f}" for v in self.dimensions),
            *(f"{v:.2f}" for v in self.location),
            f"{self.rotation_y:.2f}",
        ]
        if self.score is not None:
            fields.append(f"{self.score:.2f}")
        return " ".join(fields)


def label_from_box(
    box: Box3D,
    cls: str,
    bbox: Tuple[float, float, float, float],
    score: Optional[float] = None,
    truncated: float = 0.0,
    occluded: int = 0
) -> KittiLabel:
    """
    Build a label from a box; alpha is the observation angle at the box center.

    Args:
        box: 3D box (y at the bottom face)
        cls: category name
        bbox: 2D box in pixels
        score: optional confidence
        truncated: truncation ratio
        occluded: occlusion level

    Returns:
        KittiLabel
    """
    alpha = normalize_angle(global_to_local(box.theta_y, Vec2BEV(x=box.x, z=box.z)))
    return KittiLabel(
        type=cls,
        truncated=truncated,
        occluded=occluded,
        alpha=alpha,
        bbox=tuple(float(v) for v in bbox),
        dimensions=(box.h, box.w, box.l),
        location=(box.x, box.y, box.z),
        rotation_y=box.theta_y,
        score=score,
    )


def parse_label_line(line: str, path: Optional[str] = None, lineno: Optional[int] = None) -> KittiLabel:
    """
    Parse one label line.

    Raises:
        KittiFormatError: wrong field count or unparseable values
    """
    parts = line.split()
    if len(parts) not in (N_FIELDS, N_FIELDS + 1):
        raise KittiFormatError(f"expected {N_FIELDS} or {N_FIELDS + 1} fields, got {len(parts)}", path, lineno)
    try:
        values = [float(v) for v in parts[1:]]
        occluded = int(float(parts[2]))
        return KittiLabel(
            type=parts[0],
            truncated=values[0],
            occluded=occluded,
            alpha=values[2],
            bbox=tuple(values[3:7]),
            dimensions=tuple(values[7:10]),
            location=tuple(values[10:13]),
            rotation_y=values[13],
            score=values[14] if len(values) == N_FIELDS else None,
        )
    except (ValueError, ValidationError) as e:
        raise KittiFormatError(f"invalid label values: {e}", path, lineno) from e


def parse_labels(path: PathLike) -> List[KittiLabel]:
    """
    Read a label_2 file; blank lines are skipped.

    Args:
        path: label file

    Returns:
        Labels in file order
    """
    labels = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            labels.append(parse_label_line(line, str(path), lineno))
    logger.debug(f"Parsed {len(labels)} labels from {path}")
    return labels


def write_labels(path: PathLike, labels: List[KittiLabel]) -> None:
    """Write labels one per line with a trailing newline (an empty file for no labels)."""
    text = "".join(label.to_line() + "\n" for label in labels)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def parse_label_dir(directory: PathLike) -> Dict[str, List[KittiLabel]]:
    """frame_id -> labels for every `<frame_id>.txt` in a label directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"label directory not found: {directory}")
    return {p.stem: parse_labels(p) for p in sorted(directory.glob("*.txt"))}
