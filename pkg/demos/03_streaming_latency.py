"""
Detection latency of the streaming unit
=======================================

The streaming unit sees one pixel per clock tick and keeps only ``2*rho+1``
image rows. A marker centred at ``(r, c)`` is reported on the tick that
delivers pixel ``(r + rho, c + rho)``, so latency is set by position, not by
image content.
"""

from __future__ import annotations

import numpy as np

from markerscan.frame import DetectorConfig, Frame
from markerscan.streaming import StreamingUnit, format_trace, streaming_run_frame

W, H, rho = 752, 480, 3
cfg = DetectorConfig(radius=rho)
px = np.full((H, W), 8, dtype=np.uint8)
for r, c in [(10, 10), (240, 376), (470, 740)]:
    px[r, c] = 220
res = streaming_run_frame(Frame(px), cfg)

# %%
# Each marker appears rho rows and rho columns after its centre was read.
print(format_trace(res.emissions, res.latency.pixel_clock))
for e in res.emissions:
    r, c = e.detection.position
    print(f"marker {r, c}: tick {e.tick}, centre read at tick {r * W + c}, lag {e.tick - (r * W + c)}")

# %%
# The whole frame takes W*H ticks whatever it contains.
rep = res.latency
print(f"frame time at {rep.pixel_clock / 1e6:.2f} MHz: {rep.frame_processing_time * 1e3:.3f} ms")
print(f"nothing can be reported before tick {rep.first_emission_bound[rho]}")
print(f"storage: {StreamingUnit(rho, W, cfg.thresholds).storage_cells} cells instead of {W * H}")
