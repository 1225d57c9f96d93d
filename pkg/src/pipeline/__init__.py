"""Pipeline module for running extraction and fitting over many frames."""

from .base import BasePipeline, frame_ids_in
from .frames import FrameTask, process_frame
from .pipeline import SequentialPipeline
from .pipeline_parallel import ParallelPipeline

__all__ = ['BasePipeline', 'frame_ids_in', 'FrameTask', 'process_frame',
           'SequentialPipeline', 'ParallelPipeline']
