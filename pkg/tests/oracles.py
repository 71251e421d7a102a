"""Independent reference implementations used only by the tests.

None of these share code with the package: they are direct, slow
evaluations of the definitions.
"""

from __future__ import annotations

import numpy as np


def _decision(x: int, y: int, rho: int) -> int:
    # sign of this quantity picks the lower or upper candidate pixel; it is the
    # state-machine error term rewritten as a closed form in (x, y)
    return 2 * x * x + 4 * x + 2 * y * y - 6 * y - 3 - 2 * rho * rho + 4 * rho


def octant(rho: int) -> list[tuple[int, int]]:
    """``(x, y)`` of the second octant, ``0 <= x <= y``, column by column.

    Each column ``x >= 1`` keeps the previous row when the closed-form
    decision value there is negative and steps one row down otherwise.
    """
    pts = [(0, rho)]
    y = rho
    x = 1
    while True:
        if _decision(x, y, rho) >= 0:
            y -= 1
        if x > y:
            return pts
        pts.append((x, y))
        x += 1


def circle_set(rho: int) -> set[tuple[int, int]]:
    """8-fold mirror of :func:`octant` as ``(dy, dx)`` pairs."""
    out = set()
    for x, y in octant(rho):
        for a, b in ((x, y), (y, x)):
            for sa in (1, -1):
                for sb in (1, -1):
                    out.add((sa * a, sb * b))
    return out


def flood_interior(ring: set[tuple[int, int]]) -> set[tuple[int, int]]:
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        y, x = stack.pop()
        for q in ((y + 1, x), (y - 1, x), (y, x + 1), (y, x - 1)):
            if q not in seen and q not in ring:
                seen.add(q)
                stack.append(q)
    return seen


def direct_classify(img: np.ndarray, r: int, c: int, ring, t_marker: int, t_sun: int, t_diff: int) -> int:
    """0/1/2 from every boundary difference taken one by one (no min/max)."""
    v = int(img[r, c])
    if v <= t_marker:
        return 0
    diffs = [v - int(img[r + dy, c + dx]) for dy, dx in ring]
    if all(d >= t_diff for d in diffs):
        return 1
    if v > t_sun and all(d < t_diff for d in diffs):
        return 2
    return 0


def structured_frame(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Random frame with spikes and bright patches, so every class occurs."""
    img = rng.integers(0, 90, size=(height, width))
    n = int(rng.integers(5, 20))
    rows = rng.integers(0, height, n)
    cols = rng.integers(0, width, n)
    img[rows, cols] = rng.integers(150, 256, n)
    for _ in range(int(rng.integers(0, 3))):
        r0, c0 = rng.integers(0, height - 8), rng.integers(0, width - 8)
        h, w = rng.integers(8, 20, 2)
        img[r0 : r0 + h, c0 : c0 + w] = rng.integers(235, 256, size=img[r0 : r0 + h, c0 : c0 + w].shape)
    return img.astype(np.uint8)


def direct_classify_frame(img: np.ndarray, ring, t_marker: int, t_sun: int, t_diff: int) -> np.ndarray:
    """Vectorised :func:`direct_classify` for every pixel whose ring fits."""
    H, W = img.shape
    rho = max(max(abs(y), abs(x)) for y, x in ring)
    v = img[rho : H - rho, rho : W - rho].astype(np.int64)
    all_marker = np.ones(v.shape, dtype=bool)
    all_sun = np.ones(v.shape, dtype=bool)
    for dy, dx in ring:
        d = v - img[rho + dy : H - rho + dy, rho + dx : W - rho + dx]
        all_marker &= d >= t_diff
        all_sun &= d < t_diff
    out = np.zeros((H, W), dtype=np.uint8)
    inner = out[rho : H - rho, rho : W - rho]
    gate = v > t_marker
    inner[gate & all_marker] = 1
    inner[gate & (v > t_sun) & all_sun] = 2
    return out
