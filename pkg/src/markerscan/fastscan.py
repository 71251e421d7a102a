"""Single-pass optimised scan over a flattened working copy of the frame.

The scan uses 1-D neighbourhood offsets relative to the current address,
clears the neighbourhood interior in the working copy instead of keeping a
visited mask, and has no loop counter: a two-byte sentinel ``00 FF`` is
written at the end of the copy and probed one central offset ahead of the
current pixel. Reaching a count limit plants the sentinel at that probe
position, which ends the scan on the next iteration.

Because offsets are linear, neighbourhoods closer than ``rho`` columns to
the left or right border wrap into the adjacent row. That is kept as is.
So is the sentinel's one blind spot: a black pixel directly followed by a
saturated one inside the image also ends the scan.

Dark pixels are skipped eight at a time. The working copy is padded to a
whole number of 64-bit words; whenever the next eight pixels all fail the
brightness gate and the eight probe positions hold no zero byte, the
byte-wise loop could only advance ``i`` by eight, so the word test does
exactly that. Any other case falls through to the byte-wise loop.
"""

from __future__ import annotations

from functools import lru_cache

import numba
import numpy as np

from .circle import NeighbourhoodOffsets
from .frame import DetectionSet, DetectorConfig, Frame, FrameSizeError, detections_from_arrays

SENTINEL = (0x00, 0xFF)

_ONES = np.uint64(0x0101010101010101)
_HIGHS = np.uint64(0x8080808080808080)


@numba.njit(cache=True)
def _skip_dark_words(w64, k, d, gate_add):
    """First word index from ``k`` on that holds a gate candidate or whose
    probe words (``k + d``, ``k + d + 1``) hold a zero byte."""
    while True:
        g = w64[k]
        if (((g + gate_add) | g) & _HIGHS) != 0:
            return k
        a = w64[k + d]
        b = w64[k + d + 1]
        if ((((a - _ONES) & ~a) | ((b - _ONES) & ~b)) & _HIGHS) != 0:
            return k
        k += 1


@numba.njit(cache=True)
def _fimd_scan(work, w64, n, central, rb, ri, t_marker, t_sun, t_diff, max_markers, max_suns, words):
    # work holds n image bytes followed by zero padding up to a multiple of 8;
    # w64 is the same buffer viewed as 64-bit words
    work[n - 2] = 0x00
    work[n - 1] = 0xFF
    # adding this to a word sets each byte's high bit where the byte exceeds t_marker
    gate_add = _ONES * np.uint64(127 - t_marker) if t_marker < 128 else np.uint64(0)
    markers = np.empty(max_markers, dtype=np.int64)
    suns = np.empty(max_suns, dtype=np.int64)
    c_m = 0
    c_s = 0
    truncated = False
    rb0 = rb[0]
    nb = rb.size
    ni = ri.size
    d = (central - 1) >> 3
    i = central
    while True:
        if words and ((i + 1) & 7) == 0:
            k = _skip_dark_words(w64, (i + 1) >> 3, d, gate_add)
            i = (k << 3) - 1
        j = i + central
        if work[j] == 0x00 and work[j + 1] == 0xFF:
            break
        i += 1
        v = np.int64(work[i])
        if v <= t_marker:
            continue
        if v - work[i + rb0] < t_diff:
            if v <= t_sun:
                continue
            # sun test
            if c_s == max_suns:
                work[i + central] = 0x00
                work[i + central + 1] = 0xFF
                truncated = True
                continue
            ok = True
            for k in range(1, nb):
                if v - work[i + rb[k]] >= t_diff:
                    ok = False
                    break
            if not ok:
                continue
            for k in range(ni):
                work[i + ri[k]] = 0
            suns[c_s] = i
            c_s += 1
        else:
            # marker test
            ok = True
            for k in range(1, nb):
                if v - work[i + rb[k]] < t_diff:
                    ok = False
                    break
            if not ok:
                continue
            peak = 0
            i_p = i
            for k in range(ni):
                a = i + ri[k]
                if work[a] > peak:
                    peak = work[a]
                    i_p = a
                work[a] = 0
            markers[c_m] = i_p
            c_m += 1
            if c_m == max_markers:
                work[i + central] = 0x00
                work[i + central + 1] = 0xFF
                truncated = True
    return markers[:c_m], suns[:c_s], truncated


@lru_cache(maxsize=32)
def _offsets(rho: int, width: int) -> NeighbourhoodOffsets:
    return NeighbourhoodOffsets.build(rho, width)


def fimd_cpu_detect(frame: Frame, cfg: DetectorConfig, words: bool = True) -> DetectionSet:
    """Run the fast scan; ``words=False`` disables the eight-pixel skip."""
    rho = cfg.radius
    W, H = frame.width, frame.height
    if W <= 2 * rho + 2 or H <= 2 * rho + 2:
        raise FrameSizeError(f"{W}x{H} frame too small for the fast scan at radius {rho}")
    nb = _offsets(rho, W)
    n = W * H
    work = np.zeros(-(-n // 8) * 8 + 8, dtype=np.uint8)
    work[:n] = frame.pixels.reshape(-1)
    t = cfg.thresholds
    markers, suns, truncated = _fimd_scan(
        work,
        work.view(np.uint64),
        n,
        nb.central,
        nb.boundary_offsets,
        nb.interior_offsets,
        t.marker,
        t.sun,
        t.contrast,
        cfg.max_markers,
        cfg.max_sun_points,
        words and t.marker < 128,
    )
    return DetectionSet(
        markers=detections_from_arrays("marker", markers // W, markers % W),
        sun_points=detections_from_arrays("sun", suns // W, suns % W),
        truncated=bool(truncated),
        n_passed=len(markers) + len(suns),
    )
