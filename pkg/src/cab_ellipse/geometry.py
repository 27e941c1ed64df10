"""Five-point conic fitting and conversion to geometric ellipse parameters.

A conic through five points is written with unit constant term::

    a x^2 + 2 h x y + b y^2 + 2 g x + 2 f y + 1 = 0

and decoded into centre, semi-axes and orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

__all__ = [
    "ConicCoeffs",
    "EllipseParams",
    "DegenerateConfiguration",
    "NotAnEllipse",
    "solve_linear",
    "fit_conic_five_points",
    "conic_to_ellipse",
    "conic_residual",
    "point_on_ellipse",
    "ellipse_through",
    "normalize_angle",
]

PIVOT_TOL = 1e-12
CIRCLE_TOL = 1e-9


class DegenerateConfiguration(ValueError):
    """The five points do not determine a unique conic with non-zero constant."""


class NotAnEllipse(ValueError):
    """The conic is a hyperbola, parabola, line pair or imaginary ellipse."""


class ConicCoeffs(NamedTuple):
    a: float
    h: float
    b: float
    g: float
    f: float

    @property
    def C(self) -> float:
        return self.a * self.b - self.h * self.h

    @property
    def R(self) -> float:
        return math.sqrt((self.a - self.b) ** 2 + 4.0 * self.h * self.h)

    @property
    def delta(self) -> float:
        """Determinant of ``[[a, h, g], [h, b, f], [g, f, 1]]``."""
        a, h, b, g, f = self
        return a * (b - f * f) - h * (h - f * g) + g * (h * f - b * g)


@dataclass(frozen=True)
class EllipseParams:
    """Ellipse centre ``(x0, y0)``, semi-axes and orientation.

    ``theta`` is the angle of the major axis in radians, in ``[-pi/2, pi/2)``,
    measured from the +x axis towards +y (image rows grow downward).
    """

    x0: float
    y0: float
    r_max: float
    r_min: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r_max >= self.r_min > 0):
            raise ValueError(f"need r_max >= r_min > 0, got {self.r_max}, {self.r_min}")
        if not -math.pi / 2 <= self.theta < math.pi / 2:
            raise ValueError(f"theta {self.theta} outside [-pi/2, pi/2)")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.x0, self.y0, self.r_max, self.r_min, self.theta)


def normalize_angle(theta: float) -> float:
    """Map an axial angle to ``[-pi/2, pi/2)``."""
    t = math.fmod(theta + math.pi / 2, math.pi)
    if t < 0:
        t += math.pi
    t -= math.pi / 2
    # fmod can land exactly on the open end after rounding
    return -math.pi / 2 if t >= math.pi / 2 else t


def ellipse_through(x0, y0, r1, r2, theta) -> EllipseParams:
    """Build an :class:`EllipseParams` from unordered semi-axes.

    ``r1`` lies along ``theta``; the axes are swapped and the angle rotated a
    quarter turn when ``r2`` is the longer one.
    """
    if r2 > r1:
        r1, r2 = r2, r1
        theta = theta + math.pi / 2
    if abs(r1 - r2) < CIRCLE_TOL * r1:
        theta = 0.0
    return EllipseParams(float(x0), float(y0), float(r1), float(r2), normalize_angle(theta))


def solve_linear(A: Sequence[Sequence[float]], rhs: Sequence[float]) -> list[float]:
    """Gaussian elimination with partial pivoting.

    Raises DegenerateConfiguration when a pivot falls below ``PIVOT_TOL``
    times the largest magnitude of the initial matrix.
    """
    n = len(rhs)
    m = [list(map(float, row)) + [float(r)] for row, r in zip(A, rhs)]
    scale = max(abs(v) for row in m for v in row[:n])
    if scale == 0.0 or not math.isfinite(scale):
        raise DegenerateConfiguration("zero or non-finite system matrix")
    tol = PIVOT_TOL * scale
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) < tol:
            raise DegenerateConfiguration("singular five-point system")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        prow = m[col]
        p = prow[col]
        for r in range(col + 1, n):
            row = m[r]
            k = row[col] / p
            if k:
                for c in range(col, n + 1):
                    row[c] -= k * prow[c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        row = m[r]
        s = row[n]
        for c in range(r + 1, n):
            s -= row[c] * x[c]
        x[r] = s / row[r]
    return x


def fit_conic_five_points(points: Sequence[Sequence[float]]) -> ConicCoeffs:
    """Conic through five points, normalized to unit constant term.

    The system is solved in a centred, scaled frame for conditioning and the
    coefficients are mapped back to the input frame. A conic passing
    (numerically) through the origin cannot carry a unit constant and is
    rejected as degenerate.
    """
    if len(points) != 5:
        raise ValueError("exactly five points are required")
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    if not all(map(math.isfinite, xs + ys)):
        raise DegenerateConfiguration("non-finite point")
    cx = sum(xs) / 5.0
    cy = sum(ys) / 5.0
    s = math.sqrt(sum((x - cx) ** 2 + (y - cy) ** 2 for x, y in zip(xs, ys)) / 5.0)
    if s == 0.0:
        raise DegenerateConfiguration("coincident points")

    # in the normalized frame u = (x - cx)/s the centroid sits inside any
    # ellipse through the points, so the local constant term is non-zero
    rows = []
    for x, y in zip(xs, ys):
        u = (x - cx) / s
        v = (y - cy) / s
        rows.append([u * u, 2 * u * v, v * v, 2 * u, 2 * v])
    A, H, B, G, F = solve_linear(rows, [-1.0] * 5)

    # substitute u = (x - cx)/s and multiply through by s^2
    a = A
    h = H
    b = B
    g = G * s - A * cx - H * cy
    f = F * s - H * cx - B * cy
    c = A * cx * cx + 2 * H * cx * cy + B * cy * cy - 2 * G * s * cx - 2 * F * s * cy + s * s

    mag = max(abs(a) * (cx * cx + s * s), abs(b) * (cy * cy + s * s), s * s)
    if abs(c) < PIVOT_TOL * mag or not math.isfinite(c):
        raise DegenerateConfiguration("conic passes through the origin")
    return ConicCoeffs(a / c, h / c, b / c, g / c, f / c)


def conic_residual(c: ConicCoeffs, x: float, y: float) -> float:
    return c.a * x * x + 2 * c.h * x * y + c.b * y * y + 2 * c.g * x + 2 * c.f * y + 1.0


def conic_to_ellipse(c: ConicCoeffs) -> EllipseParams:
    """Centre, semi-axes and orientation of an elliptic conic."""
    a, h, b, g, f = c
    C = a * b - h * h
    if not C > 0:
        raise NotAnEllipse(f"ab - h^2 = {C} is not positive")
    R = math.sqrt((a - b) ** 2 + 4.0 * h * h)
    delta = c.delta
    x0 = (h * f - b * g) / C
    y0 = (g * h - a * f) / C

    den_long = C * (a + b - R)
    den_short = C * (a + b + R)
    if den_long == 0.0 or den_short == 0.0:
        raise NotAnEllipse("degenerate axis")
    q1 = -2.0 * delta / den_long
    q2 = -2.0 * delta / den_short
    if not (q1 > 0 and q2 > 0) or not (math.isfinite(q1) and math.isfinite(q2)):
        raise NotAnEllipse("non-positive radicand")
    r1 = math.sqrt(q1)
    r2 = math.sqrt(q2)

    # phi is the direction of the eigenvector of [[a, h], [h, b]] with the
    # larger eigenvalue (a+b+R)/2; r1 lies along the other eigenvector
    phi = 0.5 * math.atan2(2.0 * h, a - b)
    return ellipse_through(x0, y0, r1, r2, phi + math.pi / 2)


def point_on_ellipse(e: EllipseParams, t: float) -> tuple[float, float]:
    """Parametric point: centre + rotation(theta) @ (r_max cos t, r_min sin t)."""
    ct, st = math.cos(e.theta), math.sin(e.theta)
    u = e.r_max * math.cos(t)
    v = e.r_min * math.sin(t)
    return (e.x0 + u * ct - v * st, e.y0 + u * st + v * ct)
