"""Midpoint ellipse rasterization of candidate perimeters."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .geometry import EllipseParams

__all__ = ["mea_quadrant", "rasterize", "draw_line", "quadrant_offsets", "distance_to_ellipse"]


def mea_quadrant(rx: int, ry: int) -> list[tuple[int, int]]:
    """First-quadrant boundary pixels of ``x^2/rx^2 + y^2/ry^2 = 1``.

    Two-region midpoint scheme: region 1 steps x while the slope is shallower
    than -1, region 2 steps y down to the x axis. The decision variables are
    the usual midpoint tests scaled by 4 so every update stays integral.
    Points run from ``(0, ry)`` to ``(rx, 0)``.
    """
    rx = int(rx)
    ry = int(ry)
    if rx < 1 or ry < 1:
        raise ValueError("radii must be positive integers")
    rx2 = rx * rx
    ry2 = ry * ry
    pts = []

    x, y = 0, ry
    dx = 0  # 2 ry^2 x
    dy = 2 * rx2 * y  # 2 rx^2 y
    p = 4 * ry2 - 4 * rx2 * ry + rx2
    while dx < dy:
        pts.append((x, y))
        x += 1
        dx += 2 * ry2
        if p < 0:
            p += 4 * (dx + ry2)
        else:
            y -= 1
            dy -= 2 * rx2
            p += 4 * (dx - dy + ry2)

    # 4 * (ry^2 (x + 1/2)^2 + rx^2 (y - 1)^2 - rx^2 ry^2)
    p = ry2 * (2 * x + 1) ** 2 + 4 * rx2 * (y - 1) ** 2 - 4 * rx2 * ry2
    while y >= 0:
        pts.append((x, y))
        y -= 1
        dy -= 2 * rx2
        if p > 0:
            p += 4 * (rx2 - dy)
        else:
            x += 1
            dx += 2 * ry2
            p += 4 * (dx - dy + rx2)

    # very flat ellipses can reach the axis before x does
    lx, ly = pts[-1]
    if ly == 0:
        pts.extend((xx, 0) for xx in range(lx + 1, rx + 1))
    return pts


@lru_cache(maxsize=32768)
def quadrant_offsets(rx: int, ry: int) -> np.ndarray:
    """Four-way reflected MEA offsets as a float ``(n, 2)`` array (cached)."""
    q = np.array(mea_quadrant(rx, ry), dtype=np.float64)
    sx = np.array([1.0, -1.0, 1.0, -1.0])
    sy = np.array([1.0, 1.0, -1.0, -1.0])
    out = np.concatenate([q * [a, b] for a, b in zip(sx, sy)])
    out.setflags(write=False)
    return out


# 3x3 neighbourhood, centre first so exact ties keep the rounded pixel
_NEIGHBOURS = np.array(
    [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, -1), (-1, 1), (1, 1)],
    dtype=np.float64,
)
_NEWTON_STEPS = 4
# the rounded pixel is kept when it is this close to the curve
_KEEP_PX = 0.5


@lru_cache(maxsize=32768)
def _foot_table(rx: int, ry: int) -> tuple[np.ndarray, np.ndarray]:
    """Cosine and sine of the foot angles of the MEA offsets on their own ellipse."""
    off = quadrant_offsets(rx, ry)
    t = _foot_angle(off[:, 0], off[:, 1], float(rx), float(ry))
    ct, st = np.cos(t), np.sin(t)
    ct.setflags(write=False)
    st.setflags(write=False)
    return ct, st


def _foot_angle(u: np.ndarray, v: np.ndarray, a: float, b: float) -> np.ndarray:
    """Parametric angle of the closest curve point to ``(u, v)`` (ellipse frame).

    Newton iterations from the scaled polar angle; accurate for points near
    the curve, which is all the rasterizer needs.
    """
    t = np.arctan2(a * v, b * u)
    k = a * a - b * b
    if k == 0.0:
        return t
    for _ in range(_NEWTON_STEPS):
        st, ct = np.sin(t), np.cos(t)
        g = k * st * ct - u * a * st + v * b * ct
        dg = k * (ct * ct - st * st) - u * a * ct - v * b * st
        t = t - np.divide(g, dg, out=np.zeros_like(g), where=dg != 0)
    return t


def distance_to_ellipse(u: np.ndarray, v: np.ndarray, a: float, b: float) -> np.ndarray:
    """Distance from points ``(u, v)`` in the ellipse frame to ``u^2/a^2 + v^2/b^2 = 1``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    t = _foot_angle(u, v, a, b)
    return np.hypot(u - a * np.cos(t), v - b * np.sin(t))


def rasterize(e: EllipseParams, width: int, height: int) -> np.ndarray:
    """Perimeter pixel test set of ``e`` clipped to a ``width x height`` image.

    MEA runs on the rounded semi-axes; its offsets are rescaled to the exact
    semi-axes, rotated by ``theta`` and moved to the centre, then rounded.
    A rounded pixel farther than half a pixel from the ideal curve is
    replaced by the closest pixel of its 3x3 neighbourhood, which keeps every
    pixel within about ``sqrt(2)/2`` of the curve. Distances are measured to
    the osculating circle at each point's foot on the curve. Returns an
    ``(N_s, 2)`` int array of distinct ``(x, y)`` pixels in first-occurrence
    order of the sweep.
    """
    rx = max(1, int(math.floor(e.r_max + 0.5)))
    ry = max(1, int(math.floor(e.r_min + 0.5)))
    a, b = e.r_max, e.r_min
    off = quadrant_offsets(rx, ry)
    ct, st = _foot_table(rx, ry)
    u = off[:, 0] * (a / rx)
    v = off[:, 1] * (b / ry)
    c = math.cos(e.theta)
    s = math.sin(e.theta)
    cx = np.floor(e.x0 + u * c - v * s + 0.5)
    cy = np.floor(e.y0 + u * s + v * c + 0.5)

    # osculating circle near the foot point of each rescaled MEA point; the
    # foot angle on the integer ellipse stands in for the exact one
    nx, ny = b * ct, a * st
    nn = np.hypot(nx, ny)
    rho = nn**3 / (a * b)
    ox = a * ct - rho * nx / nn
    oy = b * st - rho * ny / nn

    def dist(px, py):
        dx = px - e.x0
        dy = py - e.y0
        return np.abs(np.hypot(dx * c + dy * s - ox, -dx * s + dy * c - oy) - rho)

    far = np.nonzero(dist(cx, cy) > _KEEP_PX)[0]
    if far.size:
        qx = cx[far, None] + _NEIGHBOURS[:, 0]
        qy = cy[far, None] + _NEIGHBOURS[:, 1]
        d = np.abs(
            np.hypot(
                (qx - e.x0) * c + (qy - e.y0) * s - ox[far, None],
                -(qx - e.x0) * s + (qy - e.y0) * c - oy[far, None],
            )
            - rho[far, None]
        )
        pick = np.argmin(d, axis=1)
        rows = np.arange(far.size)
        cx = cx.copy()
        cy = cy.copy()
        cx[far] = qx[rows, pick]
        cy[far] = qy[rows, pick]

    inside = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
    px = cx[inside].astype(np.int64)
    py = cy[inside].astype(np.int64)
    if px.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    _, first = np.unique(py * width + px, return_index=True)
    first.sort()
    return np.column_stack([px[first], py[first]])


def draw_line(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Bresenham segment between integer endpoints, inclusive."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    while True:
        out.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return out
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
