from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles

from markerscan.fastscan import fimd_cpu_detect
from markerscan.frame import (
    Blob,
    DetectorConfig,
    Frame,
    FrameSizeError,
    SunDisc,
    SynthSpec,
    random_synth_spec,
    synthesize_frame,
)
from markerscan.reference import uimd_detect

CFG = DetectorConfig()


def test_zero_frame():
    ds = fimd_cpu_detect(Frame.zeros(40, 30), CFG)
    assert len(ds) == 0 and not ds.truncated


def test_single_blob_matches_reference():
    f = synthesize_frame(48, 40, SynthSpec(blobs=[Blob(19, 30, 240, 0.9)], noise_max=10, seed=2, background=4))
    ds = fimd_cpu_detect(f, CFG)
    assert ds.marker_positions() == uimd_detect(f, CFG, radii=(3,)).marker_positions() == [(19, 30)]


def test_delta_reports_peak():
    px = np.zeros((30, 30), dtype=np.uint8)
    px[12, 17] = 200
    assert fimd_cpu_detect(Frame(px), CFG).marker_positions() == [(12, 17)]


def test_input_frame_untouched():
    f = synthesize_frame(60, 60, SynthSpec(blobs=[Blob(30, 30, 255, 1.0)], sun=SunDisc(10, 10, 6)))
    before = f.tobytes()
    fimd_cpu_detect(f, CFG)
    assert f.tobytes() == before


def test_marker_limit_truncates():
    rng = np.random.default_rng(11)
    spec = random_synth_spec(rng, 320, 240, 31, radius=3, noise_max=0)
    ds = fimd_cpu_detect(synthesize_frame(320, 240, spec), CFG)
    assert len(ds.markers) == 30 and ds.truncated


def test_marker_limit_exit_is_immediate():
    # second blob lies far beyond the central offset, so an exit right after the
    # first hit leaves it unreported
    px = np.zeros((40, 40), dtype=np.uint8)
    px[10, 10] = px[30, 30] = 200
    ds = fimd_cpu_detect(Frame(px), DetectorConfig(max_markers=1))
    assert ds.marker_positions() == [(10, 10)] and ds.truncated


def test_sun_limit_truncates():
    f = Frame(np.full((40, 40), 255, dtype=np.uint8))
    ds = fimd_cpu_detect(f, DetectorConfig(max_sun_points=3))
    assert len(ds.sun_points) == 3 and ds.truncated
    full = fimd_cpu_detect(f, CFG)
    assert not full.truncated and len(full.sun_points) > 3


def test_sun_clearing_leaves_no_neighbouring_suns():
    f = Frame(np.full((40, 40), 255, dtype=np.uint8))
    suns = fimd_cpu_detect(f, CFG).sun_positions()
    for i, a in enumerate(suns):
        for b in suns[i + 1 :]:
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) > 1


def test_frame_too_small():
    with pytest.raises(FrameSizeError):
        fimd_cpu_detect(Frame.zeros(8, 40), CFG)


def test_in_image_sentinel_pair_ends_scan():
    # the probe cannot tell the end marker from a black pixel followed by a
    # saturated one; everything from that pair on is left unscanned
    px = np.full((30, 30), 5, dtype=np.uint8)
    px[8, 8] = 200
    px[20, 15] = 200
    assert fimd_cpu_detect(Frame(px), CFG).marker_positions() == [(8, 8), (20, 15)]
    px[14, 3], px[14, 4] = 0x00, 0xFF
    assert fimd_cpu_detect(Frame(px), CFG).marker_positions() == [(8, 8)]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 4]), st.integers(1, 40), st.integers(1, 64))
def test_word_skip_is_exact(seed, rho, max_markers, max_suns):
    rng = np.random.default_rng(seed)
    w, h = int(rng.integers(2 * rho + 3, 60)), int(rng.integers(2 * rho + 3, 50))
    px = oracles.structured_frame(rng, max(w, 30), max(h, 30))[:h, :w].copy()
    if rng.random() < 0.5:
        px[rng.random(px.shape) < 0.05] = 0
    cfg = DetectorConfig(radius=rho, max_markers=max_markers, max_sun_points=max_suns)
    a = fimd_cpu_detect(Frame(px), cfg)
    b = fimd_cpu_detect(Frame(px), cfg, words=False)
    assert a == b


@pytest.mark.parametrize("col", range(8))
def test_in_image_sentinel_found_at_every_word_offset(col):
    px = np.full((30, 40), 7, dtype=np.uint8)
    px[20, 30] = 200
    px[12, 8 + col], px[12, 9 + col] = 0x00, 0xFF
    for words in (True, False):
        assert fimd_cpu_detect(Frame(px), CFG, words=words).marker_positions() == []
