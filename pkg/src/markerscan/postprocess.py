"""Cluster per-pixel detections and drop markers close to sun points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .frame import Detection

_NEIGHBOURS = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx]


def _round_half_down(v: Fraction) -> int:
    return math.ceil(v - Fraction(1, 2))


@dataclass(frozen=True)
class Cluster:
    members: tuple[tuple[int, int], ...]

    @property
    def centroid(self) -> tuple[Fraction, Fraction]:
        n = len(self.members)
        return (
            Fraction(sum(r for r, _ in self.members), n),
            Fraction(sum(c for _, c in self.members), n),
        )

    @property
    def rounded(self) -> tuple[int, int]:
        r, c = self.centroid
        return (_round_half_down(r), _round_half_down(c))

    def __len__(self) -> int:
        return len(self.members)


def _as_point(p) -> tuple[int, int]:
    if isinstance(p, Detection):
        return p.position
    return (int(p[0]), int(p[1]))


def cluster_detections(points: Iterable) -> list[Cluster]:
    """Split points into 8-connected components.

    Clusters come back ordered by their first member in row-major order, and
    members are sorted, so the result does not depend on input order.
    """
    todo = {_as_point(p) for p in points}
    clusters = []
    for seed in sorted(todo):
        if seed not in todo:
            continue
        todo.discard(seed)
        stack = [seed]
        members = []
        while stack:
            r, c = stack.pop()
            members.append((r, c))
            for dy, dx in _NEIGHBOURS:
                q = (r + dy, c + dx)
                if q in todo:
                    todo.discard(q)
                    stack.append(q)
        clusters.append(Cluster(tuple(sorted(members))))
    return clusters


def cluster_markers(markers: Sequence[Detection]) -> list[Detection]:
    """Markers replaced by the rounded centres of their clusters."""
    radius = markers[0].radius if markers else None
    return [Detection(*cl.rounded, "marker", radius) for cl in cluster_detections(markers)]


def filter_markers_by_sun(markers: Sequence, sun_points: Sequence, distance: float) -> list:
    """Markers whose Euclidean distance to every sun point is at least ``distance``."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    suns = [_as_point(s) for s in sun_points]
    limit = distance * distance
    kept = []
    for m in markers:
        r, c = _as_point(m)
        if all((r - sr) ** 2 + (c - sc) ** 2 >= limit for sr, sc in suns):
            kept.append(m)
    return kept
