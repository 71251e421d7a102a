"""Data-parallel per-pixel engine.

Every pixel runs the same independent program: gate on brightness, reduce
its circle boundary to a minimum and maximum, then classify with two
comparisons (``centre - max >= contrast`` for a marker, ``centre - min <
contrast`` for a sun point). The frame-wide evaluation is vectorised with
numpy, one shifted view per boundary offset, which is the same program
executed for all pixels at once. Results go through a capacity-checked
accumulator, so the order tasks are scheduled in only affects which
detections survive once a count limit is reached.

There is no interior clearing or peak search; cluster the output with
:func:`markerscan.postprocess.cluster_detections`.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circle import CircleFsm, boundary_points
from .frame import Detection, DetectionSet, DetectorConfig, Frame, Thresholds

NOT_A_CANDIDATE = 0
MARKER = 1
SUN = 2


class OutOfBoundsCandidate(Exception):
    """The circle boundary around the pixel leaves the frame."""


@dataclass(frozen=True)
class BoundarySummary:
    b_min: int = 255
    b_max: int = 0


def summarize_boundary(frame: Frame, r: int, c: int, rho: int) -> BoundarySummary:
    """Min/max of the boundary intensities, walking the circle state machine."""
    H, W = frame.shape
    px = frame.pixels
    b_min, b_max = 255, 0
    for y, x in CircleFsm(rho):
        rr, cc = r + y, c + x
        if not (0 <= rr < H and 0 <= cc < W):
            raise OutOfBoundsCandidate((r, c))
        v = int(px[rr, cc])
        if v > b_max:
            b_max = v
        if v < b_min:
            b_min = v
    return BoundarySummary(b_min, b_max)


def classify(value: int, summary: BoundarySummary, t: Thresholds) -> int:
    if value <= t.marker:
        return NOT_A_CANDIDATE
    if value - summary.b_max >= t.contrast:
        return MARKER
    if value > t.sun and value - summary.b_min < t.contrast:
        return SUN
    return NOT_A_CANDIDATE


def boundary_extrema(pixels: np.ndarray, rho: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel boundary min and max for all pixels whose circle fits.

    Arrays are ``(H - 2*rho, W - 2*rho)`` and index the centre ``(r, c)`` at
    ``[r - rho, c - rho]``.
    """
    H, W = pixels.shape
    b_min = np.full((H - 2 * rho, W - 2 * rho), 255, dtype=np.uint8)
    b_max = np.zeros_like(b_min)
    for y, x in boundary_points(rho):
        view = pixels[rho + y : H - rho + y, rho + x : W - rho + x]
        np.minimum(b_min, view, out=b_min)
        np.maximum(b_max, view, out=b_max)
    return b_min, b_max


def classify_frame(frame: Frame, rho: int, t: Thresholds) -> np.ndarray:
    """Class code (0 none, 1 marker, 2 sun) for every pixel of the frame.

    Pixels whose boundary leaves the frame are never candidates.
    """
    frame.require_radius(rho)
    px = frame.pixels
    H, W = px.shape
    out = np.zeros((H, W), dtype=np.uint8)
    b_min, b_max = boundary_extrema(px, rho)
    centre = px[rho : H - rho, rho : W - rho].astype(np.int16)
    gate = centre > t.marker
    marker = gate & (centre - b_max >= t.contrast)
    sun = gate & ~marker & (centre > t.sun) & (centre - b_min < t.contrast)
    inner = out[rho : H - rho, rho : W - rho]
    inner[marker] = MARKER
    inner[sun] = SUN
    return out


@dataclass
class ResultAccumulator:
    """Bounded result buffers with indivisible, capacity-checked appends."""

    max_markers: int
    max_sun_points: int
    markers: list[tuple[int, int]] = field(default_factory=list)
    sun_points: list[tuple[int, int]] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def saturated(self) -> bool:
        return len(self.markers) >= self.max_markers or len(self.sun_points) >= self.max_sun_points

    def append(self, kind: int, r: int, c: int) -> bool:
        with self._lock:
            if kind == MARKER and len(self.markers) < self.max_markers:
                self.markers.append((r, c))
                return True
            if kind == SUN and len(self.sun_points) < self.max_sun_points:
                self.sun_points.append((r, c))
                return True
            return False


def process_pixel(frame: Frame, r: int, c: int, cfg: DetectorConfig, acc: ResultAccumulator) -> None:
    """The per-pixel program, written exactly as one task would execute it."""
    if acc.saturated():
        return
    value = int(frame.pixels[r, c])
    if value <= cfg.thresholds.marker:
        return
    try:
        summary = summarize_boundary(frame, r, c, cfg.radius)
    except OutOfBoundsCandidate:
        return
    kind = classify(value, summary, cfg.thresholds)
    if kind != NOT_A_CANDIDATE:
        acc.append(kind, r, c)


def _run_tasks(codes: np.ndarray, order: np.ndarray, acc: ResultAccumulator) -> None:
    W = codes.shape[1]
    flat = codes.reshape(-1)
    for idx in order:
        if acc.saturated():
            continue
        kind = flat[idx]
        if kind:
            acc.append(int(kind), int(idx // W), int(idx % W))


def parallel_detect(
    frame: Frame,
    cfg: DetectorConfig,
    schedule: np.random.Generator | None = None,
    workers: int = 1,
) -> DetectionSet:
    """Classify every pixel independently; output order is unspecified.

    Without a ``schedule`` tasks retire in row-major order. A generator
    shuffles the task order; ``workers > 1`` additionally splits the tasks
    into chunks retired concurrently by a thread pool.
    """
    codes = classify_frame(frame, cfg.radius, cfg.thresholds)
    n_passed = int(np.count_nonzero(codes))
    acc = ResultAccumulator(cfg.max_markers, cfg.max_sun_points)
    candidates = np.flatnonzero(codes)
    if schedule is not None:
        candidates = schedule.permutation(candidates)
    if workers > 1:
        chunks = np.array_split(candidates, workers * 4)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda ch: _run_tasks(codes, ch, acc), chunks))
    else:
        _run_tasks(codes, candidates, acc)
    n_m = int(np.count_nonzero(codes == MARKER))
    n_s = n_passed - n_m
    return DetectionSet(
        markers=[Detection(r, c, "marker", cfg.radius) for r, c in acc.markers],
        sun_points=[Detection(r, c, "sun", cfg.radius) for r, c in acc.sun_points],
        truncated=len(acc.markers) < n_m or len(acc.sun_points) < n_s,
        n_passed=n_passed,
    )


def sort_detections(ds: DetectionSet) -> DetectionSet:
    return DetectionSet(
        markers=sorted(ds.markers),
        sun_points=sorted(ds.sun_points),
        truncated=ds.truncated,
        n_passed=ds.n_passed,
    )
