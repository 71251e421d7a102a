"""
Per-pixel cost model
====================

Time the reference and fast-scan engines over a small dataset with a varying
number of blobs and fit ``t = (W*H - n_det) * t_none + n_det * t_det`` to the
measurements. Absolute numbers depend on the machine; the ratio between the
engines is what to look at.
"""

from __future__ import annotations

import numpy as np

from markerscan.bench import bench_run, emit_histogram, fit_time_model, format_histogram
from markerscan.frame import DetectorConfig, random_synth_spec, synthesize_frame

rng = np.random.default_rng(4)
cfg = DetectorConfig()
frames = []
for k in range(16):
    spec = random_synth_spec(rng, 752, 480, int(rng.integers(0, 27)), radius=3, noise_max=15, background=5)
    frames.append((f"frame_{k:02d}", synthesize_frame(752, 480, spec)))

# %%
records = {engine: bench_run(frames, engine, cfg, iterations=10) for engine in ("uimd", "cpu")}
for engine, recs in records.items():
    m = fit_time_model(recs)
    mean = np.mean([r.t_mean for r in recs])
    print(f"{engine:5s} mean {mean * 1e3:.3f} ms  t_none {m.t_none * 1e9:.3f} ns  t_det {m.t_det * 1e9:.1f} ns  R2 {m.r_squared:.2f}")

# %%
# The reference engine spends nearly all its time on the per-pixel test, so
# its fitted detection cost can come out at zero. Below: markers per frame, as
# seen by the fast scan.
print(format_histogram(emit_histogram(r.n_markers for r in records["cpu"])))
