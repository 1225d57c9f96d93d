"""
Run manifest and timing collection for batch commands.
"""
import json
import os
import tempfile
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .. import __version__

TOOL_NAME = "weakbox3d"


class RunManifest:
    """
    Collects provenance, per-frame outcomes and timing during a run.

    Everything except the `timing` block depends only on the inputs, the
    configuration and the seed, so two identical runs write identical
    manifests apart from that block.
    """

    def __init__(
        self,
        command: str,
        seed: int = 0,
        config: Optional[Dict[str, Any]] = None,
        inputs: Optional[Dict[str, Any]] = None
    ):
        self.command = command
        self.seed = seed
        self.config: Dict[str, Any] = config or {}
        self.inputs: Dict[str, Any] = inputs or {}
        self.frames: Dict[str, Dict[str, Any]] = {}
        self.skips: List[Dict[str, Any]] = []
        self.outputs: Dict[str, Any] = {}
        self.stage_metrics: Dict[str, Dict[str, Any]] = {}
        self.frame_timing: Dict[str, float] = {}
        self.activity_log: List[Dict[str, Any]] = []
        self.start_time: Optional[float] = time.time()

    def start_tracking(self):
        """Start tracking run execution."""
        self.start_time = time.time()
        self.log_activity("info", f"{self.command} started", {})

    def track_stage(
        self,
        stage_name: str,
        start_time: float,
        end_time: float,
        items_processed: int = 0,
        status: str = "completed"
    ):
        """Track a run stage."""
        duration = end_time - start_time
        self.stage_metrics[stage_name] = {
            "start_time": datetime.fromtimestamp(start_time).isoformat(),
            "end_time": datetime.fromtimestamp(end_time).isoformat(),
            "duration": round(duration, 4),
            "items_processed": items_processed,
            "status": status
        }
        self.log_activity(
            "stage_complete",
            f"{stage_name} stage completed",
            {"duration": duration, "items": items_processed}
        )

    def track_frame(
        self,
        frame_id: str,
        seconds: float,
        n_outputs: int = 0,
        skips: Optional[List[Dict[str, Any]]] = None,
        success: bool = True,
        error: Optional[str] = None,
        output_path: Optional[str] = None
    ):
        """Record the outcome of one frame."""
        skips = skips or []
        self.frames[frame_id] = {
            "frame_id": frame_id,
            "success": success,
            "n_outputs": n_outputs,
            "n_skipped": len(skips),
            "error": error,
            "output": output_path,
        }
        self.frame_timing[frame_id] = round(seconds, 4)
        self.skips.extend(skips)
        if not success:
            self.log_error(f"Frame {frame_id} failed", {"error": error})

    def log_activity(
        self,
        event_type: str,
        message: str,
        metadata: Dict[str, Any]
    ):
        """Log an activity event."""
        self.activity_log.append({
            "timestamp": datetime.now().isoformat(),
            "type": event_type,
            "message": message,
            "metadata": metadata
        })

    def log_warning(self, message: str, metadata: Dict[str, Any] = None):
        self.log_activity("warning", message, metadata or {})

    def log_error(self, message: str, metadata: Dict[str, Any] = None):
        self.log_activity("error", message, metadata or {})

    def get_summary(self) -> Dict[str, Any]:
        """Counts over frames and skips, grouped by skip reason."""
        by_reason: Dict[str, int] = {}
        for skip in self.skips:
            by_reason[skip["reason"]] = by_reason.get(skip["reason"], 0) + 1
        return {
            "frames": len(self.frames),
            "failed_frames": sorted(f for f, rec in self.frames.items() if not rec["success"]),
            "outputs": sum(rec["n_outputs"] for rec in self.frames.values()),
            "skipped": len(self.skips),
            "skipped_by_reason": dict(sorted(by_reason.items())),
        }

    def to_dict(self) -> Dict[str, Any]:
        """Manifest content with frames and skips in deterministic order."""
        total_duration = time.time() - self.start_time if self.start_time else 0
        return {
            "tool": TOOL_NAME,
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "summary": self.get_summary(),
            "frames": [self.frames[f] for f in sorted(self.frames)],
            "skips": sorted(self.skips, key=lambda s: (s["frame_id"], s["det_index"])),
            "timing": {
                "total_seconds": round(total_duration, 4),
                "stages": self.stage_metrics,
                "frames": dict(sorted(self.frame_timing.items())),
                "activity_log": self.activity_log,
            },
        }

    def write(self, path: Union[str, Path]) -> str:
        """
        Write the manifest as JSON atomically (temp file + rename).

        Args:
            path: destination file

        Returns:
            The path written
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".manifest-", suffix=".json", dir=str(path.parent))
        try:
            with os.fdopen(fd, "w") as f:
                json.dump(self.to_dict(), f, indent=2)
                f.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return str(path)


def load_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r") as f:
        return json.load(f)
