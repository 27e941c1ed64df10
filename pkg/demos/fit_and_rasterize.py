"""
Five points, one ellipse
========================

Any five points in general position fix a conic. Here we take five points
from a known ellipse, recover its centre, semi-axes and orientation, and
draw its perimeter with the midpoint rasterizer.
"""

import math

import numpy as np

from cab_ellipse.geometry import conic_to_ellipse, ellipse_through, fit_conic_five_points, point_on_ellipse
from cab_ellipse.raster import mea_quadrant, rasterize

truth = ellipse_through(200, 150, 80, 30, math.pi / 6)
pts = [point_on_ellipse(truth, math.radians(a)) for a in (0, 50, 120, 200, 300)]

conic = fit_conic_five_points(pts)
print("conic a, h, b, g, f:", np.round(conic, 8))

found = conic_to_ellipse(conic)
print("recovered:", np.round(found.as_tuple(), 6))
print("truth:    ", np.round(truth.as_tuple(), 6))

# %%
# The midpoint algorithm works one quadrant of an axis-aligned ellipse at a
# time, using only integer updates.

print(mea_quadrant(8, 6))

# %%
# The full test set reflects that quadrant, scales it to the exact semi-axes,
# rotates it and clips it to the image.

s = rasterize(found, 400, 300)
print(len(s), "perimeter pixels, first few:", s[:5].tolist())

canvas = np.zeros((300, 400), dtype=np.uint8)
canvas[s[:, 1], s[:, 0]] = 255
print("pixels lit:", int((canvas > 0).sum()))
