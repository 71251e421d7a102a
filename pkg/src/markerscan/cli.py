"""Command-line front end: ``markerscan <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bench
from .frame import (
    SENSOR_SIZE,
    DetectorConfig,
    FrameError,
    SunDisc,
    Thresholds,
    list_dataset,
    load_frame,
    random_synth_spec,
    synthesize_frame,
    write_frame,
)

DETECTION_COLUMNS = ["frame", "kind", "row", "col", "radius", "engine"]


class CliError(Exception):
    pass


def parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("width and height must be positive")
    return w, h


def parse_blob_counts(text: str) -> tuple[int, int]:
    """``"5"`` for exactly five blobs per frame, ``"0-26"`` for a uniform range."""
    try:
        lo, _, hi = text.partition("-")
        lo_i = int(lo)
        hi_i = int(hi) if hi else lo_i
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A-B, got {text!r}") from None
    if lo_i < 0 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"bad blob range {text!r}")
    return lo_i, hi_i


def _config(args: argparse.Namespace) -> DetectorConfig:
    return DetectorConfig(
        radius=args.radius,
        thresholds=Thresholds(args.tm, args.ts, args.td),
        max_markers=args.lm,
        max_sun_points=args.ls,
    )


def _dataset(path: Path, raw_size: tuple[int, int] | None) -> list[tuple[str, object]]:
    files = [path] if path.is_file() else list_dataset(path) if path.is_dir() else None
    if files is None:
        raise CliError(f"no such file or directory: {path}")
    if not files:
        raise CliError(f"no frames found in {path}")
    return [(f.name, load_frame(f, size=raw_size)) for f in files]


def _write_text(out: str | None, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_detect(args: argparse.Namespace) -> None:
    cfg = _config(args)
    run = bench.get_engine(args.engine)
    rows = []
    for name, frame in _dataset(args.input, args.raw_size):
        ds = run(frame, cfg)
        markers = bench.final_markers(args.engine, ds, cfg, args.sun_filter)
        for d in list(markers) + list(ds.sun_points):
            rows.append(
                {"frame": name, "kind": d.kind, "row": d.row, "col": d.col,
                 "radius": d.radius if d.radius is not None else cfg.radius, "engine": args.engine}
            )
    if args.out and args.out.endswith(".json"):
        _write_text(args.out, json.dumps(rows, indent=1) + "\n")
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=DETECTION_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write_text(args.out, buf.getvalue())


def cmd_bench(args: argparse.Namespace) -> None:
    frames = _dataset(args.input, args.raw_size)
    records = bench.bench_run(frames, args.engine, _config(args), args.iters)
    bench.write_records(args.out, records)


def cmd_fit(args: argparse.Namespace) -> None:
    records = bench.read_records(args.records)
    if args.engine:
        records = [r for r in records if r.engine == args.engine]
    _write_text(args.out, bench.fit_time_model(records).format())


def cmd_compare(args: argparse.Namespace) -> None:
    frames = _dataset(args.input, args.raw_size)
    report = bench.compare_detectors(frames, _config(args), args.iters, args.transfer_ms * 1e-3)
    _write_text(args.out, bench.render_report(report))


def cmd_hist(args: argparse.Namespace) -> None:
    records = bench.read_records(args.records)
    engines = sorted({r.engine for r in records})
    engine = args.engine or (engines[0] if engines else None)
    counts = [r.n_markers for r in records if r.engine == engine]
    _write_text(args.out, bench.format_histogram(bench.emit_histogram(counts)))


def cmd_synth(args: argparse.Namespace) -> None:
    width, height = args.size
    lo, hi = args.blobs
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    schedule = []
    for k in range(args.frames):
        n = int(rng.integers(lo, hi, endpoint=True))
        sun = None
        if args.sun_prob > 0 and rng.random() < args.sun_prob:
            r = args.sun_radius
            sun = SunDisc(int(rng.integers(r, height - r)), int(rng.integers(r, width - r)), r)
        spec = random_synth_spec(
            rng, width, height, n, radius=args.radius, noise_max=args.noise, background=args.background, sun=sun
        )
        name = f"frame_{k:05d}.pgm"
        write_frame(synthesize_frame(width, height, spec), out / name)
        schedule.append((name, n, int(sun is not None)))
    with open(out / "schedule.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "n_blobs", "sun"])
        w.writerows(schedule)


def _add_detector_flags(p: argparse.ArgumentParser) -> None:
    d = DetectorConfig()
    p.add_argument("--radius", type=int, default=d.radius)
    p.add_argument("--tm", type=int, default=d.thresholds.marker, help="marker brightness gate")
    p.add_argument("--ts", type=int, default=d.thresholds.sun, help="sun brightness threshold")
    p.add_argument("--td", type=int, default=d.thresholds.contrast, help="centre-to-boundary contrast")
    p.add_argument("--lm", type=int, default=d.max_markers, help="marker count limit")
    p.add_argument("--ls", type=int, default=d.max_sun_points, help="sun point count limit")
    p.add_argument("--raw-size", type=parse_size, default=None, metavar="WxH",
                   help="size of headerless raw frames, e.g. 752x480 (required for .raw input)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markerscan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect markers and sun points")
    p.add_argument("input", type=Path, help="frame file or dataset directory")
    p.add_argument("--engine", choices=list(bench.ENGINES), default="cpu")
    _add_detector_flags(p)
    p.add_argument("--sun-filter", type=float, default=None, metavar="D",
                   help="drop markers closer than D px to any sun point")
    p.add_argument("--out", default=None, help="output .csv or .json (default: CSV on stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="time one engine over a dataset")
    p.add_argument("input", type=Path)
    p.add_argument("--engine", choices=list(bench.ENGINES), default="cpu")
    p.add_argument("--iters", type=int, default=bench.DEFAULT_ITERATIONS)
    _add_detector_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="fit the per-pixel cost model to bench records")
    p.add_argument("records", type=Path)
    p.add_argument("--engine", default=None, help="only use records of this engine")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="run and time every engine, write a report")
    p.add_argument("input", type=Path)
    p.add_argument("--iters", type=int, default=bench.DEFAULT_ITERATIONS)
    p.add_argument("--transfer-ms", type=float, default=bench.DEFAULT_TRANSFER_S * 1e3)
    _add_detector_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a synthetic PGM dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--blobs", type=parse_blob_counts, default=(0, 26), metavar="N|A-B")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=parse_size, default=SENSOR_SIZE, metavar="WxH")
    p.add_argument("--radius", type=int, default=3, help="radius used for blob spacing")
    p.add_argument("--noise", type=int, default=15, help="max uniform noise added per pixel")
    p.add_argument("--background", type=int, default=5)
    p.add_argument("--sun-prob", type=float, default=0.0, help="probability of a sun disc per frame")
    p.add_argument("--sun-radius", type=int, default=40)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hist", help="histogram of markers per frame from bench records")
    p.add_argument("records", type=Path)
    p.add_argument("--engine", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, FrameError, FileNotFoundError, PermissionError, IsADirectoryError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"markerscan {args.command}: error: {msg}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # output was piped into a reader that closed early, e.g. head
        sys.stderr.close()
        return 0
    return 0
