"""Frames, detector configuration, detection results and frame I/O.

A :class:`Frame` wraps a read-only ``(H, W)`` ``uint8`` array in row-major
order. Two on-disk containers are supported: binary PGM (``P5``, maxval 255)
and headerless ``raw8`` (``W*H`` bytes, top-left origin), which needs the
frame size supplied by the caller.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

FrameFormat = Literal["raw8", "pgm"]

#: Resolution of the MT9V034 sensor frames in the recorded dataset.
SENSOR_SIZE = (752, 480)


class FrameError(ValueError):
    """A frame could not be built, loaded or written."""


class UnsupportedFormatError(FrameError):
    """The file is a valid image container we do not handle (e.g. 16-bit PGM)."""


class FrameSizeError(FrameError):
    """The frame is too small for the requested detector radius."""


@dataclass(frozen=True, eq=False)
class Frame:
    """Immutable 8-bit grayscale image."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise FrameError(f"frame must be 2-D, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise FrameError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px).copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_bytes(cls, data: bytes, width: int, height: int) -> Frame:
        if len(data) != width * height:
            raise FrameError(
                f"expected {width * height} bytes for {width}x{height}, got {len(data)}"
            )
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width))

    @classmethod
    def zeros(cls, width: int, height: int) -> Frame:
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def require_radius(self, radius: int) -> None:
        side = 2 * radius + 1
        if self.width < side or self.height < side:
            raise FrameSizeError(
                f"{self.width}x{self.height} frame is smaller than the "
                f"{side}x{side} window needed for radius {radius}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self) -> int:
        return hash((self.shape, self.pixels.tobytes()))


@dataclass(frozen=True)
class Thresholds:
    """Brightness gates and differential contrast, all in 8-bit intensity units.

    ``marker`` is the minimum brightness of a marker centre, ``sun`` the
    minimum brightness of a sun point, ``contrast`` the centre-to-boundary
    difference separating the two.
    """

    marker: int = 120
    sun: int = 240
    contrast: int = 60

    def __post_init__(self) -> None:
        for name in ("marker", "sun", "contrast"):
            value = getattr(self, name)
            if not 0 < value <= 255:
                raise ValueError(f"threshold {name}={value} outside (0, 255]")
        if self.marker > self.sun:
            raise ValueError(f"marker threshold {self.marker} exceeds sun threshold {self.sun}")


@dataclass(frozen=True)
class DetectorConfig:
    radius: int = 3
    thresholds: Thresholds = field(default_factory=Thresholds)
    max_markers: int = 30
    max_sun_points: int = 8192
    # Not given by the source method; artifact default.
    sun_filter_distance: float = 50.0

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.max_markers < 1 or self.max_sun_points < 1:
            raise ValueError("count limits must be >= 1")
        if self.sun_filter_distance < 0:
            raise ValueError("sun filter distance must be >= 0")


@dataclass(frozen=True, order=True)
class Detection:
    row: int
    col: int
    kind: Literal["marker", "sun"] = field(default="marker", compare=False)
    radius: int | None = field(default=None, compare=False)

    @property
    def position(self) -> tuple[int, int]:
        return (self.row, self.col)


@dataclass
class DetectionSet:
    """Markers and sun points reported by one engine run.

    ``n_passed`` counts the pixels that passed the full segment test before
    any clustering or count limiting; it feeds the per-pixel cost model.
    """

    markers: list[Detection] = field(default_factory=list)
    sun_points: list[Detection] = field(default_factory=list)
    truncated: bool = False
    n_passed: int = 0

    def marker_positions(self) -> list[tuple[int, int]]:
        return [d.position for d in self.markers]

    def sun_positions(self) -> list[tuple[int, int]]:
        return [d.position for d in self.sun_points]

    def __len__(self) -> int:
        return len(self.markers) + len(self.sun_points)


def detections_from_arrays(
    kind: str, rows: Iterable[int], cols: Iterable[int], radius: int | None = None
) -> list[Detection]:
    return [Detection(int(r), int(c), kind, radius) for r, c in zip(rows, cols)]


# --------------------------------------------------------------------------- I/O


def _read_pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FrameError("truncated PGM header")
    return data[start:pos], pos


def parse_pgm(data: bytes) -> Frame:
    magic, pos = _read_pgm_token(data, 0)
    if magic != b"P5":
        raise UnsupportedFormatError(f"only binary P5 PGM is supported, got {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise FrameError(f"bad PGM header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormatError(f"PGM maxval {maxval} is not supported (need 255)")
    # exactly one whitespace byte separates the header from the raster
    body = data[pos + 1 :]
    expected = width * height
    if len(body) != expected:
        raise FrameError(f"PGM raster: expected {expected} bytes, got {len(body)}")
    return Frame.from_bytes(body, width, height)


def encode_pgm(frame: Frame) -> bytes:
    return f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii") + frame.tobytes()


def guess_format(path: str | os.PathLike) -> FrameFormat:
    return "pgm" if Path(path).suffix.lower() in (".pgm", ".pnm") else "raw8"


def load_frame(
    path: str | os.PathLike,
    format: FrameFormat | None = None,
    size: tuple[int, int] | None = None,
) -> Frame:
    """Read a frame from disk.

    ``size`` is ``(W, H)`` and is mandatory for ``raw8`` files.
    """
    format = format or guess_format(path)
    data = Path(path).read_bytes()
    if format == "pgm":
        return parse_pgm(data)
    if format != "raw8":
        raise UnsupportedFormatError(f"unknown frame format {format!r}")
    if size is None:
        raise FrameError("raw8 frames need an explicit WxH size")
    width, height = size
    if len(data) != width * height:
        raise FrameError(
            f"{path}: raw8 {width}x{height} needs {width * height} bytes, file has {len(data)}"
        )
    return Frame.from_bytes(data, width, height)


def write_frame(frame: Frame, path: str | os.PathLike, format: FrameFormat | None = None) -> None:
    format = format or guess_format(path)
    if format == "pgm":
        payload = encode_pgm(frame)
    elif format == "raw8":
        payload = frame.tobytes()
    else:
        raise UnsupportedFormatError(f"unknown frame format {format!r}")
    Path(path).write_bytes(payload)


FRAME_SUFFIXES = (".pgm", ".pnm", ".raw", ".bin", ".y8")


def list_dataset(directory: str | os.PathLike) -> list[Path]:
    """Frame files of a dataset directory in lexicographic order."""
    root = Path(directory)
    if not root.is_dir():
        raise FrameError(f"{root} is not a directory")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise FrameError(f"no frame files in {root}")
    return files


def iter_dataset(
    directory: str | os.PathLike, size: tuple[int, int] | None = None
) -> Iterator[tuple[str, Frame]]:
    for path in list_dataset(directory):
        yield path.name, load_frame(path, size=size)


# --------------------------------------------------------------------- synthesis


@dataclass(frozen=True)
class Blob:
    row: int
    col: int
    peak: int
    sigma: float


@dataclass(frozen=True)
class SunDisc:
    row: int
    col: int
    radius: float
    intensity: int = 255


@dataclass(frozen=True)
class SynthSpec:
    """Scene description for :func:`synthesize_frame`.

    With ``well_separated`` set, blob centres must sit inside the frame by at
    least ``radius`` pixels and at least ``2*radius + 2`` pixels apart.
    """

    blobs: Sequence[Blob] = ()
    sun: SunDisc | None = None
    noise_max: int = 0
    seed: int = 0
    well_separated: bool = False
    radius: int = 3
    background: int = 0

    def __post_init__(self) -> None:
        for b in self.blobs:
            if not 0 <= b.peak <= 255:
                raise ValueError(f"blob peak {b.peak} outside [0, 255]")
            if b.sigma <= 0:
                raise ValueError("blob sigma must be positive")
        if not 0 <= self.noise_max <= 255 or not 0 <= self.background <= 255:
            raise ValueError("noise_max and background must lie in [0, 255]")


def check_separation(spec: SynthSpec, width: int, height: int) -> None:
    rho = spec.radius
    for b in spec.blobs:
        if not (rho <= b.row < height - rho and rho <= b.col < width - rho):
            raise ValueError(f"blob at ({b.row}, {b.col}) is within {rho} px of the border")
    min_dist = 2 * rho + 2
    blobs = list(spec.blobs)
    for i, a in enumerate(blobs):
        for b in blobs[i + 1 :]:
            if math.hypot(a.row - b.row, a.col - b.col) < min_dist:
                raise ValueError(
                    f"blobs at ({a.row}, {a.col}) and ({b.row}, {b.col}) "
                    f"are closer than {min_dist} px"
                )


def blob_profile(peak: float, sigma: float, dist2: np.ndarray) -> np.ndarray:
    """Integer intensity of a Gaussian bump at squared distance ``dist2``."""
    return np.floor(peak * np.exp(-dist2 / (2.0 * sigma * sigma)) + 0.5)


def synthesize_frame(width: int, height: int, spec: SynthSpec) -> Frame:
    if spec.well_separated:
        check_separation(spec, width, height)
    canvas = np.full((height, width), float(spec.background))
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]
    for b in spec.blobs:
        reach = int(math.ceil(6 * b.sigma)) + 1
        r0, r1 = max(b.row - reach, 0), min(b.row + reach + 1, height)
        c0, c1 = max(b.col - reach, 0), min(b.col + reach + 1, width)
        if r0 >= r1 or c0 >= c1:
            continue
        d2 = (rows[r0:r1] - b.row) ** 2 + (cols[:, c0:c1] - b.col) ** 2
        patch = canvas[r0:r1, c0:c1]
        np.maximum(patch, blob_profile(b.peak, b.sigma, d2), out=patch)
    if spec.sun is not None:
        s = spec.sun
        disc = (rows - s.row) ** 2 + (cols - s.col) ** 2 <= s.radius * s.radius
        canvas[disc] = np.maximum(canvas[disc], s.intensity)
    img = canvas.astype(np.int64)
    if spec.noise_max > 0:
        rng = np.random.default_rng(spec.seed)
        img += rng.integers(0, spec.noise_max, size=img.shape, endpoint=True)
    return Frame(np.clip(img, 0, 255).astype(np.uint8))


def random_synth_spec(
    rng: np.random.Generator,
    width: int,
    height: int,
    n_blobs: int,
    *,
    radius: int = 3,
    margin: int | None = None,
    spacing: float | None = None,
    peak: tuple[int, int] = (150, 255),
    sigma: tuple[float, float] = (0.6, 1.2),
    noise_max: int = 15,
    background: int = 5,
    sun: SunDisc | None = None,
    max_tries: int = 10_000,
) -> SynthSpec:
    """Place ``n_blobs`` random blobs by rejection sampling.

    ``margin`` defaults to ``3*radius + 3`` from every border and ``spacing``
    to ``4*radius + 4`` between centres, which keeps each blob's segment
    window and cleared interior clear of its neighbours. Blobs also keep
    ``spacing`` away from the rim of an optional sun disc.
    """
    margin = 3 * radius + 3 if margin is None else margin
    spacing = 4 * radius + 4 if spacing is None else spacing
    if width <= 2 * margin or height <= 2 * margin:
        raise ValueError(f"{width}x{height} frame leaves no room inside a {margin} px margin")
    blobs: list[Blob] = []
    tries = 0
    while len(blobs) < n_blobs:
        tries += 1
        if tries > max_tries:
            raise ValueError(f"could not place {n_blobs} blobs in a {width}x{height} frame")
        r = int(rng.integers(margin, height - margin))
        c = int(rng.integers(margin, width - margin))
        if any(math.hypot(r - b.row, c - b.col) < spacing for b in blobs):
            continue
        if sun is not None and math.hypot(r - sun.row, c - sun.col) < sun.radius + spacing:
            continue
        blobs.append(
            Blob(r, c, int(rng.integers(peak[0], peak[1], endpoint=True)), float(rng.uniform(*sigma)))
        )
    return SynthSpec(
        blobs=tuple(blobs),
        sun=sun,
        noise_max=noise_max,
        seed=int(rng.integers(2**31)),
        well_separated=True,
        radius=radius,
        background=background,
    )
