"""
Parallel Frame Pipeline

Frames are independent, so they are dispatched to a process pool (the
work is CPU-bound numpy code). Every frame writes its own output file;
results are sorted by frame id afterwards so the manifest does not depend
on completion order. A frame that fails never stops the others.
"""

import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from datetime import datetime
from typing import Any, Dict, List, Optional

from .base import BasePipeline
from .frames import FrameTask, process_frame
from ..utils.logger import get_logger

logger = get_logger(__name__)


class ParallelPipeline(BasePipeline):
    """
    Frame-level parallel pipeline.

    Inherits task building and manifest bookkeeping from BasePipeline.
    """

    mode = "parallel"

    def __init__(self, *args, jobs: Optional[int] = None, **kwargs):
        """
        Initialize the parallel pipeline.

        Args:
            jobs: worker processes (None = one per CPU)
        """
        super().__init__(*args, **kwargs)
        self.jobs = jobs
        logger.info(f"ParallelPipeline initialized (jobs={'auto' if jobs is None else jobs})")

    def run(self, tasks: List[FrameTask]) -> Dict[str, Any]:
        """
        Process all frames on a process pool.

        Args:
            tasks: frame tasks

        Returns:
            Dictionary with metadata and per-frame results sorted by frame id
        """
        logger.info("=" * 60)
        logger.info(f"Starting PARALLEL pipeline over {len(tasks)} frames")
        logger.info("=" * 60)

        start_time = datetime.now()
        started = time.time()
        self.manifest.start_tracking()
        metadata = self._create_metadata(start_time, len(tasks))
        metadata["jobs"] = self.jobs

        results = []
        failed = []
        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            futures = {executor.submit(process_frame, task): task.frame_id for task in tasks}

            for future in as_completed(futures):
                frame_id = futures[future]
                try:
                    result = future.result()
                    if result["success"]:
                        logger.info(f"✓ Frame {frame_id}: {result['n_outputs']} outputs, "
                                    f"{len(result['skips'])} skipped")
                    else:
                        failed.append(frame_id)
                        logger.warning(f"✗ Frame {frame_id} failed: {result.get('error')}")
                except Exception as e:
                    logger.error(f"✗ Frame {frame_id} worker failed: {str(e)}")
                    failed.append(frame_id)
                    result = {
                        "frame_id": frame_id,
                        "success": False,
                        "n_outputs": 0,
                        "skips": [],
                        "error": str(e),
                        "output": None,
                        "seconds": 0.0,
                    }
                results.append(result)

        # Sort results by frame_id for consistent ordering
        results.sort(key=lambda r: r["frame_id"])
        for result in results:
            self._record(result)

        self.manifest.track_stage("frames", started, time.time(), len(results))
        metadata = self._finalize_metadata(metadata, results, started)
        logger.info("=" * 60)
        logger.info(f"PARALLEL pipeline completed in {metadata['duration_seconds']:.2f}s")
        logger.info(f"  - Successful frames: {len(results) - len(failed)}/{len(results)}")
        if failed:
            logger.info(f"  - Failed frames: {sorted(failed)}")
        logger.info("=" * 60)
        return {"metadata": metadata, "frames": results}
