"""Pixel-clock simulator of the streaming detector.

One :class:`StreamingUnit` models the synchronous process for one radius.
Each tick consumes exactly one pixel in row-major order and updates:

* ``rows``: a ring of ``2*rho + 1`` image rows (the only frame storage);
* ``centre``: per-column-slot central values;
* ``b_min`` / ``b_max``: per-column-slot running boundary extrema.

Slots are indexed modulo ``2*rho + 1`` by segment centre column. The tick
consuming pixel ``(r, c)`` finishes the segment centred at ``(r - rho,
c - rho)`` and, once ``r >= 2*rho`` and ``c >= 2*rho``, classifies it and
resets its slot. Slots are not reset at row starts, so segments centred near
the left border pick up stale extrema from the previous row's right end;
the simulator keeps that behaviour.

Blanking intervals are not modelled: tick number equals pixel index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from .circle import fsm_points, point_arrays
from .frame import Detection, DetectionSet, DetectorConfig, Frame, Thresholds

#: Pixel clock of the parallel camera interface (Hz).
DEFAULT_PIXEL_CLOCK = 26.67e6
#: VSYNC pulse length measured on the hardware, kept as a reference value only.
MEASURED_VSYNC_S = 9756.5e-6

KIND_NAMES = {1: "marker", 2: "sun"}


class StreamProtocolError(RuntimeError):
    """A pixel arrived out of row-major order."""


@numba.njit(cache=True)
def _tick(rows, centre, b_min, b_max, by, bx, rho, r, c, value, t_marker, t_sun, t_diff):
    n = 2 * rho + 1
    s_c = c % n
    rows[r % n, c] = value
    # central pixel of the segment centred at column c
    centre[(s_c + rho) % n] = rows[(r - rho) % n, c]
    for k in range(by.size):
        v = rows[(r - rho + by[k]) % n, c]
        i_c = (s_c + rho - bx[k]) % n
        if v > b_max[i_c]:
            b_max[i_c] = v
        if v < b_min[i_c]:
            b_min[i_c] = v
    kind = 0
    if r >= 2 * rho and c >= 2 * rho:
        p = np.int64(centre[s_c])
        if p > t_marker:
            if p - b_max[s_c] >= t_diff:
                kind = 1
            elif p > t_sun and p - b_min[s_c] < t_diff:
                kind = 2
        b_min[s_c] = 255
        b_max[s_c] = 0
    return kind


@numba.njit(cache=True)
def _stream_frame(img, rows, centre, b_min, b_max, by, bx, rho, t_marker, t_sun, t_diff):
    H, W = img.shape
    out = np.empty((H * W, 4), dtype=np.int64)
    n = 0
    for r in range(H):
        for c in range(W):
            kind = _tick(rows, centre, b_min, b_max, by, bx, rho, r, c, img[r, c], t_marker, t_sun, t_diff)
            if kind:
                out[n, 0] = kind
                out[n, 1] = r - rho
                out[n, 2] = c - rho
                out[n, 3] = r * W + c
                n += 1
    return out[:n]


@dataclass(frozen=True)
class Emission:
    detection: Detection
    tick: int


class StreamingUnit:
    """Synchronous detector for one radius, fed one pixel per tick."""

    def __init__(self, rho: int, width: int, thresholds: Thresholds):
        if rho < 1:
            raise ValueError("radius must be >= 1")
        if width < 2 * rho + 1:
            raise ValueError(f"row width {width} too small for radius {rho}")
        self.rho = rho
        self.width = width
        self.thresholds = thresholds
        n = 2 * rho + 1
        self.rows = np.zeros((n, width), dtype=np.uint8)
        self.centre = np.zeros(n, dtype=np.uint8)
        self.b_min = np.full(n, 255, dtype=np.uint8)
        self.b_max = np.zeros(n, dtype=np.uint8)
        self._by, self._bx = point_arrays(fsm_points(rho))
        self.tick = 0

    @property
    def storage_cells(self) -> int:
        """Intensity cells held by the unit: row ring plus the three slot arrays."""
        return self.rows.size + self.centre.size + self.b_min.size + self.b_max.size

    @property
    def first_emission_tick(self) -> int:
        return 2 * self.rho * (self.width + 1)

    def push_pixel(self, r: int, c: int, value: int) -> list[Emission]:
        expected = divmod(self.tick, self.width)
        if (r, c) != expected:
            raise StreamProtocolError(f"expected pixel {expected}, got ({r}, {c})")
        t = self.thresholds
        kind = _tick(
            self.rows, self.centre, self.b_min, self.b_max, self._by, self._bx,
            self.rho, r, c, np.uint8(value), t.marker, t.sun, t.contrast,
        )
        tick = self.tick
        self.tick += 1
        if not kind:
            return []
        det = Detection(r - self.rho, c - self.rho, KIND_NAMES[kind], self.rho)
        return [Emission(det, tick)]

    def run(self, frame: Frame) -> np.ndarray:
        """Stream a whole frame starting at tick 0; rows are ``(kind, row, col, tick)``."""
        if frame.width != self.width:
            raise ValueError("frame width does not match the unit")
        if self.tick:
            raise StreamProtocolError("unit already consumed pixels; use a fresh unit per frame")
        t = self.thresholds
        out = _stream_frame(
            frame.pixels, self.rows, self.centre, self.b_min, self.b_max, self._by, self._bx,
            self.rho, t.marker, t.sun, t.contrast,
        )
        self.tick = frame.width * frame.height
        return out


def streaming_push_pixel(unit: StreamingUnit, r: int, c: int, value: int) -> list[Emission]:
    return unit.push_pixel(r, c, value)


@dataclass
class LatencyReport:
    pixel_clock: float
    pixels_per_frame: int
    frame_ticks: int
    detection_ticks: list[int] = field(default_factory=list)
    detection_latency_ticks: dict[int, int] = field(default_factory=dict)
    first_emission_bound: dict[int, int] = field(default_factory=dict)
    measured_vsync_s: float = MEASURED_VSYNC_S

    @property
    def frame_processing_time(self) -> float:
        return self.pixels_per_frame / self.pixel_clock

    def tick_seconds(self, tick: int) -> float:
        return tick / self.pixel_clock


@dataclass
class StreamResult:
    detections: DetectionSet
    latency: LatencyReport
    emissions: list[Emission]


def streaming_run_frame(
    frame: Frame,
    cfg: DetectorConfig,
    radii: Sequence[int] | None = None,
    pixel_clock: float = DEFAULT_PIXEL_CLOCK,
) -> StreamResult:
    """Stream one frame through one unit per radius and merge the emissions.

    Units share no state, so each is driven through the full pixel sequence
    in turn; the emitted trace is identical to driving them in lockstep.
    Count limits cap the merged output in tick order.
    """
    radii = tuple(radii) if radii else (cfg.radius,)
    if not radii:
        raise ValueError("need at least one radius")
    frame.require_radius(max(radii))
    emissions: list[Emission] = []
    report = LatencyReport(pixel_clock, frame.width * frame.height, frame.width * frame.height)
    for rho in radii:
        unit = StreamingUnit(rho, frame.width, cfg.thresholds)
        out = unit.run(frame)
        report.first_emission_bound[rho] = unit.first_emission_tick
        report.detection_latency_ticks[rho] = rho * (frame.width + 1)
        for kind, row, col, tick in out.tolist():
            emissions.append(Emission(Detection(row, col, KIND_NAMES[kind], rho), tick))
    emissions.sort(key=lambda e: (e.tick, e.detection.radius))
    report.detection_ticks = [e.tick for e in emissions]
    markers = [e.detection for e in emissions if e.detection.kind == "marker"]
    suns = [e.detection for e in emissions if e.detection.kind == "sun"]
    ds = DetectionSet(
        markers=markers[: cfg.max_markers],
        sun_points=suns[: cfg.max_sun_points],
        truncated=len(markers) > cfg.max_markers or len(suns) > cfg.max_sun_points,
        n_passed=len(emissions),
    )
    return StreamResult(ds, report, emissions)


# ------------------------------------------------------------- trace export

TRACE_HEADER = "# kind row col radius tick time_s"


def format_trace(emissions: Iterable[Emission], pixel_clock: float = DEFAULT_PIXEL_CLOCK) -> str:
    lines = [TRACE_HEADER]
    for e in emissions:
        d = e.detection
        lines.append(f"{d.kind} {d.row} {d.col} {d.radius} {e.tick} {e.tick / pixel_clock:.9e}")
    return "\n".join(lines) + "\n"


def write_trace(path: str | Path, emissions: Iterable[Emission], pixel_clock: float = DEFAULT_PIXEL_CLOCK) -> None:
    Path(path).write_text(format_trace(emissions, pixel_clock))


def parse_trace(text: str) -> list[Emission]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, row, col, radius, tick, _ = line.split()
        out.append(Emission(Detection(int(row), int(col), kind, int(radius)), int(tick)))
    return out
