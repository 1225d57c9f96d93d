"""
Sequential Frame Pipeline

Processes frames one after another in frame-id order.
"""

import time
from datetime import datetime
from typing import Any, Dict, List

from .base import BasePipeline
from .frames import FrameTask, process_frame
from ..utils.logger import get_logger

logger = get_logger(__name__)


class SequentialPipeline(BasePipeline):
    """Runs every frame task in the calling process."""

    mode = "sequential"

    def run(self, tasks: List[FrameTask]) -> Dict[str, Any]:
        """
        Process all frames in order.

        Args:
            tasks: frame tasks

        Returns:
            Dictionary with metadata and per-frame results sorted by frame id
        """
        logger.info("=" * 60)
        logger.info(f"Starting SEQUENTIAL pipeline over {len(tasks)} frames")
        logger.info("=" * 60)

        start_time = datetime.now()
        started = time.time()
        self.manifest.start_tracking()
        metadata = self._create_metadata(start_time, len(tasks))

        results = []
        for idx, task in enumerate(sorted(tasks, key=lambda t: t.frame_id), 1):
            result = process_frame(task)
            self._record(result)
            results.append(result)
            status = "✓" if result["success"] else "✗"
            logger.info(f"{status} Frame {task.frame_id} ({idx}/{len(tasks)}): "
                        f"{result['n_outputs']} outputs, {len(result['skips'])} skipped")

        self.manifest.track_stage("frames", started, time.time(), len(results))
        metadata = self._finalize_metadata(metadata, results, started)
        logger.info(f"Pipeline completed in {metadata['duration_seconds']:.2f}s")
        return {"metadata": metadata, "frames": results}
