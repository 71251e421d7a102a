"""Unoptimised isolated-marker detector, the behavioural oracle.

Row-major scan with an auxiliary visited mask, a two-radius segment test
with per-point bounds checks, and an interior peak search over the lower
half of the neighbourhood. The structure is intentionally kept naive; it is
also the timing baseline for the faster engines.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .circle import boundary_points, interior_points, lower_half, point_arrays
from .frame import DetectionSet, DetectorConfig, Frame, detections_from_arrays

DEFAULT_RADII = (3, 4)


@dataclass(frozen=True)
class SegmentVerdict:
    marker: bool
    sun: bool
    bright_count: int
    boundary_size: int


@lru_cache(maxsize=16)
def _tables(radii: tuple[int, ...]):
    pts: list[tuple[int, int]] = []
    starts = [0]
    for rho in radii:
        pts.extend(boundary_points(rho))
        starts.append(len(pts))
    by, bx = point_arrays(pts)
    iy, ix = point_arrays(lower_half(interior_points(max(radii))))
    return by, bx, np.array(starts, dtype=np.int64), iy, ix


@numba.njit(cache=True)
def _segment_test(img, r, c, by, bx, starts, t_sun, t_diff):
    H, W = img.shape
    v = np.int64(img[r, c])
    p_m = False
    p_s = v > t_sun
    c_s = 0
    size = 0
    for k in range(starts.size - 1):
        c_s = 0
        p_m = True
        size = starts[k + 1] - starts[k]
        for j in range(starts[k], starts[k + 1]):
            rr = r + by[j]
            cc = c + bx[j]
            if not (0 <= rr < H and 0 <= cc < W):
                p_m = False
                break
            if v - np.int64(img[rr, cc]) < t_diff:
                p_m = False
                if not p_s:
                    break
                c_s += 1
            else:
                p_s = False
        if p_m:
            break
    return p_m, p_s, c_s, size


@numba.njit(cache=True)
def _peak_search(img, visited, r, c, iy, ix):
    H, W = img.shape
    rp = r
    cp = c
    peak = 0
    for j in range(iy.size):
        rr = r + iy[j]
        cc = c + ix[j]
        if not (0 <= rr < H and 0 <= cc < W):
            break
        if not visited[rr, cc]:
            if img[rr, cc] > peak:
                peak = img[rr, cc]
                rp = rr
                cp = cc
            visited[rr, cc] = True
    return rp, cp


@numba.njit(cache=True)
def _uimd_scan(img, by, bx, starts, iy, ix, t_marker, t_sun, t_diff):
    H, W = img.shape
    visited = np.zeros((H, W), dtype=np.bool_)
    markers = np.empty((H * W, 2), dtype=np.int64)
    suns = np.empty((H * W, 2), dtype=np.int64)
    n_m = 0
    n_s = 0
    for r in range(H):
        for c in range(W):
            if visited[r, c]:
                continue
            if img[r, c] > t_marker:
                p_m, p_s, c_s, size = _segment_test(img, r, c, by, bx, starts, t_sun, t_diff)
                if p_m:
                    rp, cp = _peak_search(img, visited, r, c, iy, ix)
                    markers[n_m, 0] = rp
                    markers[n_m, 1] = cp
                    n_m += 1
                elif p_s and c_s == size:
                    suns[n_s, 0] = r
                    suns[n_s, 1] = c
                    n_s += 1
    return markers[:n_m], suns[:n_s]


def uimd_segment_test(
    frame: Frame, r: int, c: int, cfg: DetectorConfig, radii: tuple[int, ...] = DEFAULT_RADII
) -> SegmentVerdict:
    """Segment test of one pixel; the caller has already checked the marker gate."""
    if not (0 <= r < frame.height and 0 <= c < frame.width):
        raise IndexError(f"pixel ({r}, {c}) outside {frame.width}x{frame.height} frame")
    by, bx, starts, _, _ = _tables(tuple(radii))
    t = cfg.thresholds
    p_m, p_s, c_s, size = _segment_test(frame.pixels, r, c, by, bx, starts, t.sun, t.contrast)
    return SegmentVerdict(bool(p_m), bool(p_s), int(c_s), int(size))


def uimd_peak_search(
    frame: Frame, visited: np.ndarray, r: int, c: int, rho: int = max(DEFAULT_RADII)
) -> tuple[int, int]:
    """Brightest unvisited pixel in the lower half of the interior; marks ``visited``."""
    iy, ix = point_arrays(lower_half(interior_points(rho)))
    rp, cp = _peak_search(frame.pixels, visited, r, c, iy, ix)
    return int(rp), int(cp)


def uimd_detect(
    frame: Frame, cfg: DetectorConfig, radii: tuple[int, ...] = DEFAULT_RADII
) -> DetectionSet:
    """Run the reference detector.

    ``radii`` defaults to the two-radius test (3 then 4); pass a single
    radius for the single-radius mode the other engines are compared against.
    Count limits only cap the reported lists; they never change the scan.
    """
    radii = tuple(radii)
    frame.require_radius(max(radii))
    t = cfg.thresholds
    by, bx, starts, iy, ix = _tables(radii)
    markers, suns = _uimd_scan(frame.pixels, by, bx, starts, iy, ix, t.marker, t.sun, t.contrast)
    n_passed = len(markers) + len(suns)
    truncated = len(markers) > cfg.max_markers or len(suns) > cfg.max_sun_points
    markers = markers[: cfg.max_markers]
    suns = suns[: cfg.max_sun_points]
    return DetectionSet(
        markers=detections_from_arrays("marker", markers[:, 0], markers[:, 1]),
        sun_points=detections_from_arrays("sun", suns[:, 0], suns[:, 1]),
        truncated=truncated,
        n_passed=n_passed,
    )
