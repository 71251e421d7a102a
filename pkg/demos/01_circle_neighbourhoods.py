"""
Circle neighbourhoods
=====================

Every detector compares a pixel with a ring of pixels around it. This script
draws the rings for the two radii the detectors use, shows the order in
which the reference engine visits ring pixels, and estimates how much of the
plane no ring of any radius ever touches.
"""

from __future__ import annotations

import numpy as np

from markerscan.circle import boundary_points, interior_points, linear_offsets, uncovered_fraction

# %%
# The ring and its interior, drawn as characters. ``#`` is the ring, ``.``
# the interior that the fast scan clears after a hit.
for rho in (3, 4):
    grid = np.full((2 * rho + 1, 2 * rho + 1), " ")
    for y, x in interior_points(rho):
        grid[y + rho, x + rho] = "."
    for y, x in boundary_points(rho):
        grid[y + rho, x + rho] = "#"
    print(f"radius {rho}: {len(boundary_points(rho))} ring pixels, {len(interior_points(rho))} interior")
    print("\n".join(" ".join(row) for row in grid))
    print()

# %%
# Evaluation order: opposite pixels come in pairs and each new pair is as
# far as possible from the ones already tested, so a non-marker usually
# fails within the first few comparisons.
order = boundary_points(3)
print("visit order (dy, dx):", order[:8], "...")

# %%
# On a flattened image of width W, a ring pixel (dy, dx) sits at a fixed
# address offset dy*W + dx from the centre.
print("offsets for W=752:", linear_offsets(order[:4], 752))

# %%
# Rings of consecutive radii do not tile the plane. Roughly one lattice point
# in ten is missed by every ring up to the chosen maximum radius.
for rho_max in (10, 100, 400):
    print(f"uncovered fraction up to radius {rho_max}: {float(uncovered_fraction(rho_max)):.4f}")
