"""
Base Pipeline Class

Shared functionality for the sequential and parallel frame pipelines.
"""

import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from ..fitting import FitConfig
from ..pointcloud import Detection2D, ExtractionConfig
from ..utils.logger import get_logger
from ..utils.manifest import RunManifest
from .frames import FrameTask

logger = get_logger(__name__)


def frame_ids_in(directory: Path, suffix: str) -> List[str]:
    """Sorted frame ids of the files with the given suffix in a directory."""
    return sorted(p.stem for p in Path(directory).glob(f"*{suffix}"))


class BasePipeline:
    """
    Base class for frame pipelines.

    Builds the per-frame tasks and records outcomes in the run manifest;
    subclasses decide how tasks are executed.
    """

    mode = "base"

    def __init__(
        self,
        fit_config: Optional[FitConfig] = None,
        extraction_config: Optional[ExtractionConfig] = None,
        seed: int = 0,
        manifest: Optional[RunManifest] = None
    ):
        """
        Initialize the base pipeline.

        Args:
            fit_config: fitter settings
            extraction_config: extraction settings
            seed: run seed
            manifest: optional RunManifest for provenance and timing
        """
        self.fit_config = fit_config or FitConfig()
        self.extraction_config = extraction_config or ExtractionConfig()
        self.seed = seed
        self.manifest = manifest or RunManifest(command="run", seed=seed)

    def build_tasks(
        self,
        command: str,
        out_dir: str,
        calib_dir: str,
        detections: Mapping[str, Sequence[Detection2D]],
        scans_dir: Optional[str] = None,
        points_dir: Optional[str] = None
    ) -> List[FrameTask]:
        """
        One task per frame found in the scans (or points) directory.

        Args:
            command: "extract" or "fit"
            out_dir: output directory (one file per frame)
            calib_dir: calibration directory
            detections: frame_id -> detections
            scans_dir: velodyne directory
            points_dir: directory of extracted object points

        Returns:
            Tasks sorted by frame id
        """
        if points_dir is not None:
            frames = frame_ids_in(Path(points_dir), ".txt")
        else:
            frames = frame_ids_in(Path(scans_dir), ".bin")
        missing = sorted(set(detections) - set(frames))
        if missing:
            message = f"{len(missing)} frames have detections but no input file: {missing[:5]}"
            logger.warning(message)
            self.manifest.log_warning(message, {"frames": missing})

        tasks = []
        for frame_id in frames:
            tasks.append(FrameTask(
                frame_id=frame_id,
                command=command,
                calib_path=str(Path(calib_dir) / f"{frame_id}.txt"),
                scan_path=str(Path(scans_dir) / f"{frame_id}.bin") if scans_dir is not None else None,
                points_path=str(Path(points_dir) / f"{frame_id}.txt") if points_dir is not None else None,
                detections=list(detections.get(frame_id, [])),
                out_path=str(Path(out_dir) / f"{frame_id}.txt"),
                fit=self.fit_config,
                extraction=self.extraction_config,
                seed=self.seed,
            ))
        return tasks

    def _record(self, result: Dict[str, Any]) -> None:
        self.manifest.track_frame(
            result["frame_id"],
            result.get("seconds", 0.0),
            n_outputs=result.get("n_outputs", 0),
            skips=result.get("skips", []),
            success=result.get("success", False),
            error=result.get("error"),
            output_path=result.get("output"),
        )

    def _create_metadata(self, start_time: datetime, n_frames: int) -> Dict[str, Any]:
        """Create standard metadata for pipeline results."""
        return {
            "start_time": start_time.isoformat(),
            "n_frames": n_frames,
            "seed": self.seed,
            "mode": self.mode,
        }

    def _finalize_metadata(
        self,
        metadata: Dict[str, Any],
        results: List[Dict[str, Any]],
        started: float
    ) -> Dict[str, Any]:
        """Finalize metadata with end time, duration and status."""
        failed = [r["frame_id"] for r in results if not r["success"]]
        metadata["end_time"] = datetime.now().isoformat()
        metadata["duration_seconds"] = time.time() - started
        metadata["status"] = "completed" if not failed else "completed_with_errors"
        metadata["failed_frames"] = failed
        return metadata

    def get_summary(self, results: Dict[str, Any]) -> Dict[str, Any]:
        """
        Generate a summary of pipeline results.

        Args:
            results: dictionary returned by run()

        Returns:
            Summary dictionary with key counts
        """
        frames = results.get("frames", [])
        return {
            "total_frames": len(frames),
            "successful_frames": sum(1 for f in frames if f["success"]),
            "total_outputs": sum(f["n_outputs"] for f in frames),
            "total_skipped": sum(len(f["skips"]) for f in frames),
            "duration_seconds": results.get("metadata", {}).get("duration_seconds", 0),
        }

    def run(self, tasks: List[FrameTask]) -> Dict[str, Any]:
        raise NotImplementedError
