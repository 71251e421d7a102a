"""Timing harness, per-pixel cost model and engine comparison report.

Frame times are modelled as ``t = (W*H - n_det) * t_none + n_det * t_det``
where ``n_det`` is the number of pixels that passed the segment test.
Measurement (:func:`bench_run`) and report rendering
(:func:`render_report`) are separate so reports can be rebuilt from stored
records without re-timing anything.
"""

from __future__ import annotations

import csv
import itertools
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import nnls

from .fastscan import fimd_cpu_detect
from .frame import Detection, DetectionSet, DetectorConfig, Frame
from .parallel import parallel_detect
from .postprocess import cluster_markers, filter_markers_by_sun
from .reference import uimd_detect
from .streaming import DEFAULT_PIXEL_CLOCK, streaming_run_frame

#: Host transfer delay of one frame over USB measured on the original rig.
DEFAULT_TRANSFER_S = 3.8e-3
DEFAULT_ITERATIONS = 100


def _run_uimd(frame: Frame, cfg: DetectorConfig) -> DetectionSet:
    return uimd_detect(frame, cfg, radii=(cfg.radius,))


def _run_stream(frame: Frame, cfg: DetectorConfig) -> DetectionSet:
    return streaming_run_frame(frame, cfg).detections


ENGINES: dict[str, Callable[[Frame, DetectorConfig], DetectionSet]] = {
    "uimd": _run_uimd,
    "cpu": fimd_cpu_detect,
    "parallel": parallel_detect,
    "stream": _run_stream,
}

#: Engines without interior clearing report every passing pixel.
CLUSTERED_ENGINES = frozenset({"parallel", "stream"})


class UnknownEngineError(KeyError):
    pass


class DegenerateFitError(ValueError):
    pass


def get_engine(name: str) -> Callable[[Frame, DetectorConfig], DetectionSet]:
    try:
        return ENGINES[name]
    except KeyError:
        raise UnknownEngineError(f"unknown engine {name!r}; choose from {', '.join(ENGINES)}") from None


def final_markers(engine: str, ds: DetectionSet, cfg: DetectorConfig, sun_filter: float | None = None) -> list[Detection]:
    markers = cluster_markers(ds.markers) if engine in CLUSTERED_ENGINES else list(ds.markers)
    if sun_filter is not None:
        markers = filter_markers_by_sun(markers, ds.sun_points, sun_filter)
    return markers


@dataclass
class BenchRecord:
    frame: str
    engine: str
    width: int
    height: int
    iterations: int
    t_mean: float
    t_std: float
    n_det: int
    n_markers: int

    @property
    def pixels(self) -> int:
        return self.width * self.height


def bench_run(
    frames: Iterable[tuple[str, Frame]],
    engine: str,
    cfg: DetectorConfig,
    iterations: int = DEFAULT_ITERATIONS,
    pixel_clock: float = DEFAULT_PIXEL_CLOCK,
) -> list[BenchRecord]:
    """Time ``engine`` on every frame: one untimed warm-up, then ``iterations`` runs.

    The streaming engine is a simulator, so its record carries the modelled
    hardware frame time ``W*H / pixel_clock`` rather than host wall time.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    run = get_engine(engine)
    records = []
    for name, frame in frames:
        ds = run(frame, cfg)
        n_markers = len(final_markers(engine, ds, cfg))
        if engine == "stream":
            times = np.full(iterations, frame.width * frame.height / pixel_clock)
        else:
            times = np.empty(iterations)
            for k in range(iterations):
                t0 = time.perf_counter_ns()
                run(frame, cfg)
                times[k] = (time.perf_counter_ns() - t0) * 1e-9
        records.append(
            BenchRecord(
                frame=name,
                engine=engine,
                width=frame.width,
                height=frame.height,
                iterations=iterations,
                t_mean=float(times.mean()),
                t_std=float(times.std()),
                n_det=ds.n_passed,
                n_markers=n_markers,
            )
        )
    return records


_RECORD_FIELDS = [f.name for f in fields(BenchRecord)]


def write_records(path: str | Path, records: Sequence[BenchRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=_RECORD_FIELDS)
        w.writeheader()
        for rec in records:
            row = asdict(rec)
            row["t_mean"] = repr(rec.t_mean)
            row["t_std"] = repr(rec.t_std)
            w.writerow(row)


def read_records(path: str | Path) -> list[BenchRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                BenchRecord(
                    frame=row["frame"],
                    engine=row["engine"],
                    width=int(row["width"]),
                    height=int(row["height"]),
                    iterations=int(row["iterations"]),
                    t_mean=float(row["t_mean"]),
                    t_std=float(row["t_std"]),
                    n_det=int(row["n_det"]),
                    n_markers=int(row["n_markers"]),
                )
            )
    return out


# ------------------------------------------------------------------ cost model


@dataclass(frozen=True)
class CostModel:
    t_none: float
    t_det: float
    r_squared: float
    n_records: int

    def predict(self, pixels: int, n_det: int) -> float:
        return (pixels - n_det) * self.t_none + n_det * self.t_det

    def format(self) -> str:
        return (
            f"t_none_s {self.t_none:.6e}\n"
            f"t_det_s {self.t_det:.6e}\n"
            f"r_squared {self.r_squared:.6f}\n"
            f"records {self.n_records}\n"
        )


def fit_time_model(records: Sequence[BenchRecord]) -> CostModel:
    """Least-squares fit of the two per-pixel costs, both constrained >= 0."""
    if len(records) < 2:
        raise DegenerateFitError("need at least two records to fit the cost model")
    n_det = np.array([r.n_det for r in records], dtype=float)
    if np.all(n_det == n_det[0]):
        raise DegenerateFitError(
            "every record has the same n_det; use a dataset with varied detection counts"
        )
    pixels = np.array([r.pixels for r in records], dtype=float)
    t = np.array([r.t_mean for r in records], dtype=float)
    A = np.column_stack([pixels - n_det, n_det])
    # column scaling keeps the solve well conditioned for ns-scale costs
    scale = np.abs(A).max(axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, t, rcond=None)
    if np.any(coef < 0):
        coef, _ = nnls(A / scale, t)
    t_none, t_det = coef / scale
    resid = t - A @ np.array([t_none, t_det])
    ss_tot = float(((t - t.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    # constant times (the streaming engine) leave nothing to explain
    tiny = len(t) * (1e-9 * float(np.abs(t).mean())) ** 2
    r2 = 1.0 if ss_tot <= tiny else 1.0 - ss_res / ss_tot
    return CostModel(float(t_none), float(t_det), r2, len(records))


# ------------------------------------------------------------------ histograms


def emit_histogram(counts: Iterable[int]) -> list[tuple[int, int]]:
    """``(marker count, frames)`` for every count from 0 to the observed maximum."""
    counts = list(counts)
    if not counts:
        return []
    freq = np.bincount(np.asarray(counts, dtype=np.int64))
    return [(k, int(v)) for k, v in enumerate(freq)]


def format_histogram(hist: Sequence[tuple[int, int]]) -> str:
    if not hist:
        return ""
    return "markers frames\n" + "".join(f"{k} {v}\n" for k, v in hist)


# --------------------------------------------------------------------- compare


@dataclass
class EngineSummary:
    engine: str
    mean: float
    std: float
    model: CostModel | None


@dataclass
class Agreement:
    engine: str
    frames: int
    count_matches: int
    max_centroid_offset: int | None
    truncated_frames: int = 0

    @property
    def match_rate(self) -> float:
        return self.count_matches / self.frames if self.frames else 1.0


@dataclass
class CompareReport:
    summaries: dict[str, EngineSummary]
    agreement: list[Agreement]
    stream_frame_time: float
    transfer_s: float
    speedups: dict[tuple[str, str], float] = field(default_factory=dict)


def summarize(records_by_engine: Mapping[str, Sequence[BenchRecord]]) -> dict[str, EngineSummary]:
    out = {}
    for engine, recs in records_by_engine.items():
        means = np.array([r.t_mean for r in recs])
        try:
            model = fit_time_model(recs)
        except DegenerateFitError:
            model = None
        out[engine] = EngineSummary(engine, float(means.mean()), float(means.std()), model)
    return out


def measure_agreement(
    frames: Sequence[tuple[str, Frame]], cfg: DetectorConfig, engines: Sequence[str] = ("cpu", "parallel", "stream")
) -> list[Agreement]:
    """Compare marker counts and positions of each engine against the reference.

    Every engine's markers go through the sun filter first, so sun-disc edge
    artefacts do not count as disagreements.
    """
    sun_d = cfg.sun_filter_distance
    refs = [final_markers("uimd", _run_uimd(f, cfg), cfg, sun_d) for _, f in frames]
    out = []
    for engine in engines:
        run = get_engine(engine)
        matches = 0
        worst: int | None = None
        truncated = 0
        for (_, frame), ref in zip(frames, refs):
            ds = run(frame, cfg)
            truncated += ds.truncated
            got = final_markers(engine, ds, cfg, sun_d)
            matches += len(got) == len(ref)
            for m in got:
                if ref:
                    off = min(max(abs(m.row - q.row), abs(m.col - q.col)) for q in ref)
                    worst = off if worst is None else max(worst, off)
        out.append(Agreement(engine, len(frames), matches, worst, truncated))
    return out


def build_report(
    records_by_engine: Mapping[str, Sequence[BenchRecord]],
    agreement: Sequence[Agreement],
    transfer_s: float = DEFAULT_TRANSFER_S,
) -> CompareReport:
    summaries = summarize(records_by_engine)
    speedups = {}
    for a, b in itertools.permutations(summaries, 2):
        if summaries[a].mean > 0:
            speedups[(a, b)] = summaries[b].mean / summaries[a].mean
    stream = records_by_engine.get("stream")
    stream_time = stream[0].t_mean if stream else float("nan")
    return CompareReport(summaries, list(agreement), stream_time, transfer_s, speedups)


def render_report(report: CompareReport) -> str:
    lines = ["# frame processing time (mean +- std over frames)"]
    for s in report.summaries.values():
        lines.append(f"{s.engine:10s} {s.mean * 1e3:10.4f} ms +- {s.std * 1e3:.4f} ms")
    lines.append("")
    lines.append("# per-pixel cost model")
    for s in report.summaries.values():
        if s.model is None:
            lines.append(f"{s.engine:10s} n/a (n_det does not vary)")
        else:
            m = s.model
            lines.append(
                f"{s.engine:10s} t_none {m.t_none * 1e9:.4f} ns  t_det {m.t_det * 1e9:.4f} ns  R2 {m.r_squared:.4f}"
            )
    lines.append("")
    lines.append("# speedup (row engine relative to column engine: t_col / t_row)")
    for (a, b), v in sorted(report.speedups.items()):
        lines.append(f"{a:10s} vs {b:10s} {v:10.3f}x")
    lines.append("")
    lines.append("# agreement with the reference engine after clustering and sun filtering")
    lines.append("# (per-pixel engines apply count limits before clustering; see 'truncated')")
    for ag in report.agreement:
        off = "n/a" if ag.max_centroid_offset is None else str(ag.max_centroid_offset)
        lines.append(
            f"{ag.engine:10s} count match {ag.count_matches}/{ag.frames} ({100 * ag.match_rate:.1f}%)  max Linf offset {off} px"
            f"  truncated {ag.truncated_frames}"
        )
    lines.append("")
    lines.append("# end-to-end delay after exposure")
    lines.append(f"stream     {report.stream_frame_time * 1e3:.4f} ms (in-line with readout, no transfer)")
    for s in report.summaries.values():
        if s.engine == "stream":
            continue
        total = report.transfer_s + s.mean
        lines.append(f"{s.engine:10s} {total * 1e3:.4f} ms = transfer {report.transfer_s * 1e3:.2f} ms + processing")
    return "\n".join(lines) + "\n"


def compare_detectors(
    frames: Sequence[tuple[str, Frame]],
    cfg: DetectorConfig,
    iterations: int = DEFAULT_ITERATIONS,
    transfer_s: float = DEFAULT_TRANSFER_S,
) -> CompareReport:
    if not frames:
        raise ValueError("dataset is empty")
    records = {engine: bench_run(frames, engine, cfg, iterations) for engine in ENGINES}
    agreement = measure_agreement(frames, cfg)
    return build_report(records, agreement, transfer_s)
