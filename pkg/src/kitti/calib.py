"""
KITTI Calibration and Velodyne Files

Calibration: `KEY: v1 v2 ...` lines (P0-P3, R0_rect, Tr_velo_to_cam,
Tr_imu_to_velo). Scans: headerless little-endian float32 quadruples.
"""

from collections import OrderedDict
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ..pointcloud import CameraModel, RawScan
from ..utils.errors import KittiFormatError
from ..utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

EXPECTED_SIZES = {
    "P0": 12, "P1": 12, "P2": 12, "P3": 12,
    "R0_rect": 9, "Tr_velo_to_cam": 12, "Tr_imu_to_velo": 12,
}
REQUIRED_KEYS = ("P2", "R0_rect", "Tr_velo_to_cam")

SCAN_DTYPE = np.dtype("<f4")
BYTES_PER_POINT = 4 * SCAN_DTYPE.itemsize


def parse_calib_file(path: PathLike) -> Dict[str, np.ndarray]:
    """
    Read every matrix of a calibration file, preserving key order.

    Raises:
        KittiFormatError: malformed line, unparseable number or wrong count
    """
    matrices: Dict[str, np.ndarray] = OrderedDict()
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            key, sep, rest = line.partition(":")
            if not sep:
                raise KittiFormatError("expected 'KEY: values'", str(path), lineno)
            key = key.strip()
            try:
                values = np.array([float(v) for v in rest.split()])
            except ValueError as e:
                raise KittiFormatError(f"bad number in {key}: {e}", str(path), lineno) from e
            expected = EXPECTED_SIZES.get(key)
            if expected is not None and values.size != expected:
                raise KittiFormatError(f"{key} needs {expected} values, got {values.size}", str(path), lineno)
            matrices[key] = values
    missing = [k for k in REQUIRED_KEYS if k not in matrices]
    if missing:
        raise KittiFormatError(f"missing calibration entries: {', '.join(missing)}", str(path))
    return matrices


def parse_calib(path: PathLike, image_size: Tuple[int, int] = (1242, 375)) -> CameraModel:
    """
    Build the camera model of a frame from its calibration file.

    Args:
        path: calib/<frame>.txt
        image_size: (width, height) in pixels

    Returns:
        CameraModel with extrinsic R0_rect @ Tr_velo_to_cam
    """
    m = parse_calib_file(path)
    return CameraModel.from_kitti(m["P2"], m["R0_rect"], m["Tr_velo_to_cam"], image_size)


def write_calib_file(path: PathLike, matrices: Dict[str, np.ndarray]) -> None:
    """Write matrices in KITTI layout, values as %.12e."""
    lines = []
    for key, values in matrices.items():
        flat = np.asarray(values, dtype=float).ravel()
        lines.append(f"{key}: " + " ".join(f"{v:.12e}" for v in flat))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_calib(path: PathLike, cam: CameraModel) -> None:
    """
    Write a camera model as a calibration file.

    The extrinsic goes into Tr_velo_to_cam with an identity R0_rect, so
    parsing the file back yields the same extrinsic.
    """
    p2 = cam.projection_matrix()
    write_calib_file(path, OrderedDict([
        ("P0", p2), ("P1", p2), ("P2", p2), ("P3", p2),
        ("R0_rect", np.eye(3)),
        ("Tr_velo_to_cam", cam.extrinsic[:3, :4]),
        ("Tr_imu_to_velo", np.hstack([np.eye(3), np.zeros((3, 1))])),
    ]))


def parse_scan(path: PathLike) -> RawScan:
    """
    Read a velodyne .bin file.

    Raises:
        KittiFormatError: file size not a multiple of 16 bytes
    """
    size = Path(path).stat().st_size
    if size % BYTES_PER_POINT:
        raise KittiFormatError(f"size {size} is not a multiple of {BYTES_PER_POINT} bytes", str(path))
    data = np.fromfile(path, dtype=SCAN_DTYPE).reshape(-1, 4)
    return RawScan(points=data.astype(np.float64))


def write_scan(path: PathLike, scan: RawScan) -> None:
    """Write a scan as little-endian float32 quadruples."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    scan.points.astype(SCAN_DTYPE).tofile(str(path))
