"""Bresenham circle neighbourhoods shared by every detector engine.

Boundary points come from a small octant state machine (:class:`CircleFsm`)
which emits one ``(dy, dx)`` pair per call. Everything else (interior,
evaluation order, 1-D offsets) is derived from that boundary.

Coordinates are ``(dy, dx)`` with ``+dy`` pointing down the image rows.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

Point = tuple[int, int]

TERMINATED = None


class CircleFsm:
    """Octant state machine generating a radius-``rho`` Bresenham circle.

    States 1-8 emit one mirrored point each, state 0 advances the octant
    coordinates, state 9 is terminal. ``rho`` is fixed for the instance.
    """

    __slots__ = ("rho", "state", "x", "y", "p")

    def __init__(self, rho: int):
        if rho < 1:
            raise ValueError(f"radius must be >= 1, got {rho}")
        self.rho = rho
        self.state = 1
        self.x = 0
        self.y = rho
        self.p = 3 - 2 * rho

    def next(self) -> Point | None:
        """Next boundary point, or ``None`` once the circle is exhausted."""
        s = self.state
        x, y = self.x, self.y
        if s == 0:
            x += 1
            if self.p < 0:
                self.p += 4 * x + 6
            else:
                y -= 1
                self.p += 4 * (x - y) + 10
            self.x, self.y = x, y
            s = 1 if x <= y else 9
        if s == 1:
            self.state = 2
            return (y, -x)
        if s == 2:
            self.state = 3 if x < y else (5 if x > 0 else 0)
            return (-y, x)
        if s == 3:
            self.state = 4
            return (x, -y)
        if s == 4:
            self.state = 5 if x > 0 else 0
            return (-x, y)
        if s == 5:
            self.state = 6
            return (y, x)
        if s == 6:
            self.state = 7 if x < y else 0
            return (-y, -x)
        if s == 7:
            self.state = 8
            return (x, y)
        if s == 8:
            self.state = 0
            return (-x, -y)
        self.state = 9
        return TERMINATED

    def __iter__(self) -> Iterator[Point]:
        while (pt := self.next()) is not None:
            yield pt


def fsm_next(fsm: CircleFsm) -> Point | None:
    return fsm.next()


@lru_cache(maxsize=None)
def fsm_points(rho: int) -> tuple[Point, ...]:
    """Boundary points in FSM emission order."""
    return tuple(CircleFsm(rho))


def _clockwise_angle(p: Point) -> float:
    # 0 at the top (dy < 0), increasing towards +dx (right), image coordinates
    return math.atan2(p[1], -p[0]) % (2 * math.pi)


def evaluation_order(points: list[Point]) -> list[Point]:
    """Greedy farthest-point ordering of a point-symmetric boundary.

    Starts at the topmost point. Each step takes the point farthest (by
    minimum squared distance) from everything already chosen, ties going to
    the smallest clockwise angle from the top, and appends it together with
    its antipode.
    """
    remaining = set(points)
    if not remaining:
        return []
    order: list[Point] = []
    mind: dict[Point, int] = {}

    def take(q: Point) -> None:
        order.append(q)
        remaining.discard(q)
        mind.pop(q, None)
        for p in remaining:
            d = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
            if p not in mind or d < mind[p]:
                mind[p] = d

    best = min(remaining, key=lambda p: (p[0], _clockwise_angle(p)))
    while True:
        take(best)
        anti = (-best[0], -best[1])
        if anti in remaining:
            take(anti)
        if not remaining:
            return order
        best = max(remaining, key=lambda p: (mind[p], -_clockwise_angle(p)))


@lru_cache(maxsize=None)
def _boundary(rho: int) -> tuple[Point, ...]:
    return tuple(evaluation_order(list(fsm_points(rho))))


def boundary_points(rho: int) -> list[Point]:
    """Boundary of the radius-``rho`` circle in evaluation order."""
    if rho < 1:
        raise ValueError(f"radius must be >= 1, got {rho}")
    return list(_boundary(rho))


@lru_cache(maxsize=None)
def _interior(rho: int) -> tuple[Point, ...]:
    ring = set(fsm_points(rho))
    seen = {(0, 0)}
    queue = deque([(0, 0)])
    while queue:
        y, x = queue.popleft()
        for q in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if q in seen or q in ring:
                continue
            if abs(q[0]) > rho or abs(q[1]) > rho:
                raise AssertionError(f"flood fill escaped the radius-{rho} ring")
            seen.add(q)
            queue.append(q)
    return tuple(sorted(seen))


def interior_points(rho: int) -> list[Point]:
    """Lattice points enclosed by the boundary ring, row-major order.

    Filled with 4-connectivity from the centre; the ring is 8-connected, so
    4-connected flooding cannot leak through its diagonal steps.
    """
    if rho < 1:
        raise ValueError(f"radius must be >= 1, got {rho}")
    return list(_interior(rho))


def lower_half(interior: list[Point]) -> list[Point]:
    """Interior points at or after the centre in row-major scan order."""
    return [p for p in interior if p[0] > 0 or (p[0] == 0 and p[1] >= 0)]


def linear_offsets(points: list[Point], width: int) -> list[int]:
    return [width * y + x for y, x in points]


@dataclass(frozen=True)
class NeighbourhoodOffsets:
    """All neighbourhood tables for one radius and image width."""

    rho: int
    width: int
    boundary: tuple[Point, ...]
    interior: tuple[Point, ...]
    lower: tuple[Point, ...]
    central: int
    boundary_offsets: np.ndarray
    interior_offsets: np.ndarray

    @classmethod
    def build(cls, rho: int, width: int) -> NeighbourhoodOffsets:
        if width <= 2 * rho:
            raise ValueError(f"width {width} too small for radius {rho}")
        b = boundary_points(rho)
        i = interior_points(rho)
        bo = np.array(linear_offsets(b, width), dtype=np.int64)
        io = np.array(linear_offsets(i, width), dtype=np.int64)
        bo.flags.writeable = False
        io.flags.writeable = False
        return cls(rho, width, tuple(b), tuple(i), tuple(lower_half(i)), (width + 1) * rho, bo, io)


def point_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    """Split ``(dy, dx)`` pairs into two int64 arrays for the compiled kernels."""
    arr = np.array(points, dtype=np.int64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def uncovered_fraction(rho_max: int) -> Fraction:
    """Share of lattice points lying on no circle of radius ``1..rho_max``.

    The domain is every non-centre lattice point with ``dy^2 + dx^2 <
    (rho_max + 1/2)^2``; for ``rho_max = 1`` that is the 3x3 block minus its
    centre.
    """
    if rho_max < 1:
        raise ValueError("rho_max must be >= 1")
    n = 2 * rho_max + 1
    covered = np.zeros((n, n), dtype=bool)
    for rho in range(1, rho_max + 1):
        pts = np.array(fsm_points(rho) if rho <= 64 else tuple(CircleFsm(rho)), dtype=np.int64)
        covered[pts[:, 0] + rho_max, pts[:, 1] + rho_max] = True
    yy, xx = np.mgrid[-rho_max : rho_max + 1, -rho_max : rho_max + 1]
    d2 = 4 * (yy * yy + xx * xx)
    domain = (d2 < (2 * rho_max + 1) ** 2) & (d2 > 0)
    total = int(domain.sum())
    uncovered = int((domain & ~covered).sum())
    return Fraction(uncovered, total)
