"""Detection of bright LED markers and sun points in 8-bit grayscale frames.

Four engines share one configuration and one result type:

* :func:`uimd_detect`: reference scan with a visited mask and peak search;
* :func:`fimd_cpu_detect`: optimised single-pass scan over a working copy;
* :func:`parallel_detect`: independent per-pixel classification;
* :func:`streaming_run_frame`: pixel-clock simulation of an in-line detector.
"""

from __future__ import annotations

from .bench import BenchRecord, CostModel, bench_run, compare_detectors, emit_histogram, fit_time_model
from .circle import CircleFsm, NeighbourhoodOffsets, boundary_points, interior_points, uncovered_fraction
from .fastscan import fimd_cpu_detect
from .frame import (
    Detection,
    DetectionSet,
    DetectorConfig,
    Frame,
    FrameError,
    SynthSpec,
    Thresholds,
    load_frame,
    synthesize_frame,
    write_frame,
)
from .parallel import parallel_detect
from .postprocess import cluster_detections, filter_markers_by_sun
from .reference import uimd_detect
from .streaming import StreamingUnit, streaming_run_frame

__all__ = [
    "BenchRecord",
    "CircleFsm",
    "CostModel",
    "Detection",
    "DetectionSet",
    "DetectorConfig",
    "Frame",
    "FrameError",
    "NeighbourhoodOffsets",
    "StreamingUnit",
    "SynthSpec",
    "Thresholds",
    "bench_run",
    "boundary_points",
    "cluster_detections",
    "compare_detectors",
    "emit_histogram",
    "filter_markers_by_sun",
    "fimd_cpu_detect",
    "fit_time_model",
    "interior_points",
    "load_frame",
    "parallel_detect",
    "streaming_run_frame",
    "synthesize_frame",
    "uimd_detect",
    "uncovered_fraction",
    "write_frame",
]
