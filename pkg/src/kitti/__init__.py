"""KITTI module: label, calibration, velodyne and detection I/O plus AP evaluation."""

from .labels import KittiLabel, label_from_box, parse_label_dir, parse_label_line, parse_labels, write_labels
from .calib import parse_calib, parse_calib_file, write_calib, write_calib_file, parse_scan, write_scan
from .detections import parse_detections, write_detections, load_mask, save_mask
from .points import read_object_points, write_object_points
from .evaluate import (
    EvalConfig,
    EvalResult,
    DIFFICULTY_FILTERS,
    average_precision,
    evaluate,
    format_report,
    match_frame,
    passes_difficulty,
    recall_points,
    report_json,
)

__all__ = [
    'KittiLabel', 'label_from_box', 'parse_label_dir', 'parse_label_line', 'parse_labels', 'write_labels',
    'parse_calib', 'parse_calib_file', 'write_calib', 'write_calib_file', 'parse_scan',
    'write_scan', 'parse_detections', 'write_detections', 'load_mask', 'save_mask',
    'read_object_points', 'write_object_points',
    'EvalConfig', 'EvalResult', 'DIFFICULTY_FILTERS', 'average_precision', 'evaluate',
    'format_report', 'match_frame', 'passes_difficulty', 'recall_points', 'report_json',
]
