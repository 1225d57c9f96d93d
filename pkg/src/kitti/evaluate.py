"""
KITTI Detection Evaluation

Per-frame greedy matching under rotated BEV or 3D IoU, then precision
interpolated at 11 or 40 recall points. GTs outside the difficulty level,
GTs of a similar class (Van for Car, Person_sitting for Pedestrian) and
DontCare entries are ignored: they are never false negatives, and a
detection matching them is neither a true nor a false positive.
"""

import json
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry import Box3D, bev_iou, bev_rect_of, iou_3d
from ..utils.logger import get_logger
from .labels import KittiLabel

logger = get_logger(__name__)

Difficulty = Literal["easy", "moderate", "hard"]

# min bbox height (px), max occlusion level, max truncation
DIFFICULTY_FILTERS: Dict[str, Tuple[float, int, float]] = {
    "easy": (40.0, 0, 0.15),
    "moderate": (25.0, 1, 0.30),
    "hard": (25.0, 2, 0.50),
}

SIMILAR_CLASSES: Dict[str, Tuple[str, ...]] = {
    "Car": ("Van",),
    "Pedestrian": ("Person_sitting",),
}


class EvalConfig(BaseModel):
    """
    Evaluation protocol.

    Attributes:
        cls: evaluated category
        iou_threshold: match threshold in (0, 1]
        metric: AP11 or AP40 interpolation
        mode: BEV or 3D IoU
        difficulties: levels to report
    """

    model_config = ConfigDict(frozen=True)

    cls: str = "Car"
    iou_threshold: float = Field(default=0.5, gt=0, le=1)
    metric: Literal["AP11", "AP40"] = "AP40"
    mode: Literal["BEV", "3D"] = "BEV"
    difficulties: List[Difficulty] = Field(default_factory=lambda: ["easy", "moderate", "hard"])


class EvalResult(BaseModel):
    """AP per difficulty for one (class, mode, threshold, metric) setting."""

    model_config = ConfigDict(frozen=True)

    cls: str
    mode: str
    iou: float
    metric: str
    easy: Optional[float] = None
    moderate: Optional[float] = None
    hard: Optional[float] = None
    n_gt: Dict[str, int] = Field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "class": self.cls,
            "mode": self.mode,
            "iou": self.iou,
            "metric": self.metric,
            "easy": self.easy,
            "moderate": self.moderate,
            "hard": self.hard,
        }


class FrameMatches(NamedTuple):
    """Scored detections of one frame: scores, true-positive flags, valid GT count."""
    scores: np.ndarray
    tp: np.ndarray
    n_gt: int


def passes_difficulty(label: KittiLabel, difficulty: str) -> bool:
    min_height, max_occ, max_trunc = DIFFICULTY_FILTERS[difficulty]
    return (label.bbox_height >= min_height
            and 0 <= label.occluded <= max_occ
            and label.truncated <= max_trunc)


def recall_points(metric: str) -> List[float]:
    """The recall positions where interpolated precision is sampled."""
    if metric == "AP11":
        return [k / 10.0 for k in range(11)]
    return [k / 40.0 for k in range(1, 41)]


def _iou_fn(mode: str):
    if mode == "3D":
        return iou_3d
    return lambda a, b: bev_iou(bev_rect_of(a), bev_rect_of(b))


def match_frame(
    dets: Sequence[KittiLabel],
    gts: Sequence[KittiLabel],
    cfg: EvalConfig,
    difficulty: str
) -> FrameMatches:
    """
    Greedy score-descending matching for one frame.

    Detections are visited by decreasing score (ties in input order); each
    takes the unmatched valid GT of highest IoU at or above the threshold.

    Args:
        dets: detections of the frame (all classes)
        gts: ground truth of the frame (all classes)
        cfg: protocol
        difficulty: level used to split valid from ignored GTs

    Returns:
        FrameMatches for the detections that were not ignored
    """
    iou = _iou_fn(cfg.mode)
    similar = SIMILAR_CLASSES.get(cfg.cls, ())
    valid: List[Box3D] = []
    ignored: List[Box3D] = []
    for g in gts:
        if g.type == cfg.cls:
            (valid if passes_difficulty(g, difficulty) else ignored).append(g.to_box3d())
        elif g.type in similar:
            ignored.append(g.to_box3d())

    candidates = [d for d in dets if d.type == cfg.cls]
    order = sorted(range(len(candidates)),
                   key=lambda i: -(candidates[i].score if candidates[i].score is not None else 1.0))
    matched = [False] * len(valid)
    scores: List[float] = []
    flags: List[bool] = []
    for i in order:
        det = candidates[i]
        box = det.to_box3d()
        best, best_iou = -1, -1.0
        for j, gt in enumerate(valid):
            if matched[j]:
                continue
            overlap = iou(box, gt)
            if overlap >= cfg.iou_threshold and overlap > best_iou:
                best, best_iou = j, overlap
        if best >= 0:
            matched[best] = True
            flags.append(True)
        elif any(iou(box, gt) >= cfg.iou_threshold for gt in ignored):
            continue
        else:
            flags.append(False)
        scores.append(det.score if det.score is not None else 1.0)
    return FrameMatches(scores=np.array(scores, dtype=float), tp=np.array(flags, dtype=bool), n_gt=len(valid))


def average_precision(scores: np.ndarray, tp: np.ndarray, n_gt: int, metric: str = "AP40") -> float:
    """
    Interpolated AP from pooled detections.

    Precision at recall r is the maximum precision at any recall >= r (0
    when r is never reached). Ties in score keep their input order.
    """
    if n_gt == 0:
        return 0.0
    scores = np.asarray(scores, dtype=float)
    tp = np.asarray(tp, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    tp_cum = np.cumsum(tp[order])
    fp_cum = np.cumsum(~tp[order])
    recall = tp_cum / n_gt
    precision = tp_cum / np.maximum(tp_cum + fp_cum, 1)
    values = []
    for r in recall_points(metric):
        reached = recall >= r
        values.append(float(precision[reached].max()) if np.any(reached) else 0.0)
    return float(np.mean(values))


def evaluate(
    dets: Dict[str, List[KittiLabel]],
    gts: Dict[str, List[KittiLabel]],
    cfg: Optional[EvalConfig] = None
) -> EvalResult:
    """
    Compute AP for every requested difficulty.

    Args:
        dets: frame_id -> detections (with scores)
        gts: frame_id -> ground-truth labels
        cfg: protocol

    Returns:
        EvalResult with one AP per difficulty
    """
    cfg = cfg or EvalConfig()
    frames = sorted(set(gts) | set(dets))
    missing = [f for f in gts if f not in dets]
    if missing:
        logger.debug(f"{len(missing)} GT frames have no detection file")

    aps: Dict[str, float] = {}
    n_gt: Dict[str, int] = {}
    for difficulty in cfg.difficulties:
        per_frame = [match_frame(dets.get(f, []), gts.get(f, []), cfg, difficulty) for f in frames]
        scores = np.concatenate([m.scores for m in per_frame]) if per_frame else np.empty(0)
        tp = np.concatenate([m.tp for m in per_frame]) if per_frame else np.empty(0, dtype=bool)
        total = sum(m.n_gt for m in per_frame)
        aps[difficulty] = average_precision(scores, tp, total, cfg.metric)
        n_gt[difficulty] = total
        logger.debug(f"{cfg.cls} {cfg.mode}@{cfg.iou_threshold} {difficulty}: "
                     f"{int(tp.sum())} TP / {len(tp)} dets, {total} GT")

    return EvalResult(cls=cfg.cls, mode=cfg.mode, iou=cfg.iou_threshold, metric=cfg.metric,
                      n_gt=n_gt, **aps)


def format_report(results: List[EvalResult]) -> str:
    """Line-oriented text report, AP as percentages."""
    lines = []
    for r in results:
        cells = []
        for name in ("easy", "moderate", "hard"):
            value = getattr(r, name)
            cells.append(f"{name} {value * 100:6.2f}" if value is not None else f"{name}    n/a")
        lines.append(f"{r.cls} {r.mode} {r.metric} @ IoU {r.iou:.2f}: " + "  ".join(cells))
    return "\n".join(lines) + "\n"


def report_json(results: List[EvalResult]) -> str:
    """Machine-readable report: a JSON list of records."""
    return json.dumps([r.to_record() for r in results], indent=2)
