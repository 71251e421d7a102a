from __future__ import annotations

import numpy as np
import pytest

from markerscan.bench import (
    ENGINES,
    Agreement,
    BenchRecord,
    DegenerateFitError,
    UnknownEngineError,
    bench_run,
    build_report,
    compare_detectors,
    emit_histogram,
    fit_time_model,
    format_histogram,
    read_records,
    render_report,
    write_records,
)
from markerscan.frame import Blob, DetectorConfig, Frame, SynthSpec, random_synth_spec, synthesize_frame

CFG = DetectorConfig()


def blob_frame(seed=0, n=3, size=(96, 64)):
    rng = np.random.default_rng(seed)
    return synthesize_frame(*size, random_synth_spec(rng, *size, n, radius=3))


def planted(t_none, t_det, n_dets, pixels=752 * 480, noise=None):
    recs = []
    for k, n in enumerate(n_dets):
        t = (pixels - n) * t_none + n * t_det
        if noise is not None:
            t *= 1 + noise[k]
        recs.append(BenchRecord(f"f{k}", "cpu", 752, 480, 1, t, 0.0, int(n), 0))
    return recs


def test_one_frame_one_iteration_has_zero_deviation():
    (rec,) = bench_run([("a", blob_frame())], "cpu", CFG, iterations=1)
    assert rec.t_std == 0.0 and rec.iterations == 1 and rec.t_mean > 0
    assert rec.n_det == 3 and rec.n_markers == 3


@pytest.mark.parametrize("engine", list(ENGINES))
def test_zero_frames_have_no_detections(engine):
    recs = bench_run([("z0", Frame.zeros(32, 32)), ("z1", Frame.zeros(32, 32))], engine, CFG, iterations=2)
    assert [r.n_det for r in recs] == [0, 0]


def test_stream_records_are_modelled():
    recs = bench_run([("a", blob_frame(1)), ("b", Frame.zeros(96, 64))], "stream", CFG, iterations=3)
    assert {r.t_mean for r in recs} == {96 * 64 / 26.67e6}
    assert all(r.t_std == 0 for r in recs)


def test_repeatability():
    frames = [("a", blob_frame(2))]
    a = bench_run(frames, "cpu", CFG, iterations=30)[0]
    b = bench_run(frames, "cpu", CFG, iterations=30)[0]
    # absolute floor absorbs timer granularity on very fast runs
    assert abs(a.t_mean - b.t_mean) <= 3 * max(a.t_std, b.t_std) + 20e-6


def test_bench_errors():
    with pytest.raises(UnknownEngineError):
        bench_run([("a", Frame.zeros(32, 32))], "gpu", CFG)
    with pytest.raises(ValueError):
        bench_run([("a", Frame.zeros(32, 32))], "cpu", CFG, iterations=0)


def test_records_roundtrip(tmp_path):
    recs = planted(1.234567890123e-9, 9.87654321e-8, [0, 5, 17])
    write_records(tmp_path / "r.csv", recs)
    assert read_records(tmp_path / "r.csv") == recs


def test_fit_exact():
    m = fit_time_model(planted(1e-9, 100e-9, [0, 3, 10, 26, 400, 5000]))
    assert m.t_none == pytest.approx(1e-9, rel=1e-12)
    assert m.t_det == pytest.approx(100e-9, rel=1e-12)
    assert m.r_squared == pytest.approx(1.0)


def test_fit_noisy():
    rng = np.random.default_rng(7)
    n = rng.integers(0, 3000, 200)
    m = fit_time_model(planted(1e-9, 100e-9, n, noise=rng.uniform(-0.01, 0.01, 200)))
    assert m.t_none == pytest.approx(1e-9, rel=0.05)
    assert m.t_det == pytest.approx(100e-9, rel=0.05)


def test_fit_degenerate():
    with pytest.raises(DegenerateFitError, match="varied"):
        fit_time_model(planted(1e-9, 1e-7, [0, 0, 0]))
    with pytest.raises(DegenerateFitError):
        fit_time_model(planted(1e-9, 1e-7, [4]))


def test_fit_is_nonnegative():
    recs = planted(1e-9, 0.0, [0, 100, 200])
    recs[2].t_mean *= 0.5
    m = fit_time_model(recs)
    assert m.t_none >= 0 and m.t_det >= 0


def test_histogram():
    assert emit_histogram([0, 0, 1]) == [(0, 2), (1, 1)]
    assert emit_histogram([]) == [] and format_histogram([]) == ""
    assert format_histogram([(0, 2), (1, 1)]) == "markers frames\n0 2\n1 1\n"


def test_histogram_matches_blob_schedule():
    rng = np.random.default_rng(12)
    schedule = rng.integers(0, 7, 100)
    frames = [
        (f"f{k}", synthesize_frame(96, 96, random_synth_spec(rng, 96, 96, int(n), radius=3)))
        for k, n in enumerate(schedule)
    ]
    recs = bench_run(frames, "cpu", CFG, iterations=1)
    assert emit_histogram(r.n_markers for r in recs) == emit_histogram(schedule)


def test_report_from_fixed_records_is_deterministic():
    recs = {
        "uimd": planted(4e-9, 2e-7, [1, 5, 9]),
        "cpu": planted(1e-9, 1e-7, [1, 5, 9]),
    }
    ag = [Agreement("cpu", 3, 3, 0)]
    r1 = render_report(build_report(recs, ag, 3.8e-3))
    r2 = render_report(build_report(recs, ag, 3.8e-3))
    assert r1 == r2
    rep = build_report(recs, ag)
    mean = {k: np.mean([r.t_mean for r in v]) for k, v in recs.items()}
    assert rep.speedups[("cpu", "uimd")] == pytest.approx(mean["uimd"] / mean["cpu"])
    assert "transfer 3.80 ms" in r1


def test_compare_identical_frames():
    f = blob_frame(4, n=5)
    rep = compare_detectors([("a", f), ("b", f), ("c", f)], CFG, iterations=2)
    assert all(a.match_rate == 1.0 for a in rep.agreement)
    assert all(a.max_centroid_offset <= CFG.radius for a in rep.agreement)
    assert rep.summaries["stream"].std == 0.0
    text = render_report(rep)
    assert "count match 3/3 (100.0%)" in text


def test_fast_scan_cheaper_per_pixel():
    rng = np.random.default_rng(21)
    frames = [
        (f"f{k}", synthesize_frame(376, 240, random_synth_spec(rng, 376, 240, k % 13, radius=3)))
        for k in range(12)
    ]
    ref = fit_time_model(bench_run(frames, "uimd", CFG, iterations=5))
    fast = fit_time_model(bench_run(frames, "cpu", CFG, iterations=5))
    assert fast.t_none < ref.t_none
