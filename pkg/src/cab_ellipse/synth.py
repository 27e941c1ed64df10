"""Synthetic test scenes with exact edge maps and ground truth."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .edges import CannyConfig, canny
from .geometry import EllipseParams, ellipse_through
from .raster import draw_line, rasterize

__all__ = [
    "Shape",
    "SceneSpec",
    "Scene",
    "render",
    "add_salt_pepper",
    "parametric_angle",
    "ellipse_to_json",
    "ellipse_from_json",
    "load_spec",
]

_VERTEX_COUNT = {"rectangle": 4, "triangle": 3, "segment": 2}


@dataclass(frozen=True)
class Shape:
    """Distractor outline: a closed polygon (rectangle, triangle) or a segment."""

    kind: str
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        n = _VERTEX_COUNT.get(self.kind)
        if n is None:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if len(self.vertices) != n:
            raise ValueError(f"{self.kind} needs {n} vertices, got {len(self.vertices)}")

    def pixels(self) -> list[tuple[int, int]]:
        v = [(int(round(x)), int(round(y))) for x, y in self.vertices]
        edges = list(zip(v, v[1:]))
        if self.kind != "segment":
            edges.append((v[-1], v[0]))
        out = []
        for (x0, y0), (x1, y1) in edges:
            out.extend(draw_line(x0, y0, x1, y1))
        return out


@dataclass
class SceneSpec:
    """Scene description.

    ``occlusions`` maps ellipse index to a parametric arc gap
    ``(t_start, t_end)`` in radians whose perimeter pixels are omitted.
    With ``filled`` the gray image carries filled shapes and the edge map
    comes from Canny; otherwise both hold the same 1-pixel outlines.
    """

    width: int = 400
    height: int = 300
    ellipses: list[EllipseParams] = field(default_factory=list)
    distractors: list[Shape] = field(default_factory=list)
    noise_density: float = 0.0
    occlusions: dict[int, tuple[float, float]] = field(default_factory=dict)
    seed: int = 0
    filled: bool = False

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")
        if not 0.0 <= self.noise_density < 0.5:
            raise ValueError("noise_density must lie in [0, 0.5)")
        for i in self.occlusions:
            if not 0 <= i < len(self.ellipses):
                raise ValueError(f"occlusion refers to missing ellipse {i}")
        for i, e in enumerate(self.ellipses):
            if len(rasterize(e, self.width, self.height)) == 0:
                raise ValueError(f"ellipse {i} lies fully outside the image")
        for s in self.distractors:
            if not any(0 <= x < self.width and 0 <= y < self.height for x, y in s.pixels()):
                raise ValueError(f"{s.kind} lies fully outside the image")

    @classmethod
    def from_json(cls, data: dict) -> "SceneSpec":
        ellipses = []
        occlusions = {}
        for i, item in enumerate(data.get("ellipses", [])):
            ellipses.append(ellipse_from_json(item))
            if item.get("occlusion") is not None:
                t0, t1 = item["occlusion"]
                occlusions[i] = (float(t0), float(t1))
        distractors = [
            Shape(d["type"], tuple((float(x), float(y)) for x, y in d["vertices"]))
            for d in data.get("distractors", [])
        ]
        spec = cls(
            width=int(data.get("width", 400)),
            height=int(data.get("height", 300)),
            ellipses=ellipses,
            distractors=distractors,
            noise_density=float(data.get("noise_density", 0.0)),
            occlusions=occlusions,
            seed=int(data.get("seed", 0)),
            filled=bool(data.get("filled", False)),
        )
        spec.validate()
        return spec


@dataclass
class Scene:
    image: np.ndarray
    edges: np.ndarray
    truth: list[EllipseParams]


def ellipse_to_json(e: EllipseParams, ident: int | None = None) -> dict:
    d = {
        "x0": e.x0,
        "y0": e.y0,
        "r_max": e.r_max,
        "r_min": e.r_min,
        "theta_deg": math.degrees(e.theta),
    }
    if ident is not None:
        d = {"id": ident, **d}
    return d


def ellipse_from_json(d: dict) -> EllipseParams:
    """Accepts ``theta_deg`` (preferred) or ``theta`` in radians."""
    theta = math.radians(d["theta_deg"]) if "theta_deg" in d else float(d.get("theta", 0.0))
    return ellipse_through(d["x0"], d["y0"], float(d["r_max"]), float(d["r_min"]), theta)


def load_spec(path) -> SceneSpec:
    with open(path) as fh:
        return SceneSpec.from_json(json.load(fh))


def parametric_angle(e: EllipseParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Eccentric-anomaly angle in ``[0, 2 pi)`` of pixels relative to ``e``."""
    c, s = math.cos(e.theta), math.sin(e.theta)
    dx = np.asarray(x, dtype=np.float64) - e.x0
    dy = np.asarray(y, dtype=np.float64) - e.y0
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return np.mod(np.arctan2(v / e.r_min, u / e.r_max), 2 * math.pi)


def _in_gap(t: np.ndarray, gap: tuple[float, float]) -> np.ndarray:
    t0 = gap[0] % (2 * math.pi)
    width = gap[1] - gap[0]
    if width >= 2 * math.pi:
        return np.ones_like(t, dtype=bool)
    return np.mod(t - t0, 2 * math.pi) < width


def _outline(e: EllipseParams, spec: SceneSpec, i: int) -> np.ndarray:
    pts = rasterize(e, spec.width, spec.height)
    gap = spec.occlusions.get(i)
    if gap is not None and len(pts):
        pts = pts[~_in_gap(parametric_angle(e, pts[:, 0], pts[:, 1]), gap)]
    return pts


def _filled_ellipse(e: EllipseParams, w: int, h: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    c, s = math.cos(e.theta), math.sin(e.theta)
    u = (xx - e.x0) * c + (yy - e.y0) * s
    v = -(xx - e.x0) * s + (yy - e.y0) * c
    return (u / e.r_max) ** 2 + (v / e.r_min) ** 2 <= 1.0


def _filled_polygon(verts: Sequence[tuple[float, float]], w: int, h: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    inside = np.zeros((h, w), dtype=bool)
    n = len(verts)
    # even-odd rule
    for k in range(n):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > yy) != (y2 > yy)
        xint = x1 + (yy - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xx < xint)
    return inside


def render(spec: SceneSpec, canny_config: CannyConfig | None = None) -> Scene:
    """Render the scene's gray image, edge map and ground truth.

    Outline mode draws 255-valued outlines on black and uses the same pixels
    as the edge map; noise hits image and edge map at the same pixels.
    Filled mode fills shapes (occlusion gaps are not applied), adds the
    noise to the image and runs Canny with ``canny_config`` for the edge map.
    """
    spec.validate()
    w, h = spec.width, spec.height
    edges = np.zeros((h, w), dtype=bool)
    for i, e in enumerate(spec.ellipses):
        pts = _outline(e, spec, i)
        edges[pts[:, 1], pts[:, 0]] = True
    for shape in spec.distractors:
        for x, y in shape.pixels():
            if 0 <= x < w and 0 <= y < h:
                edges[y, x] = True

    if spec.filled:
        mask = np.zeros((h, w), dtype=bool)
        for e in spec.ellipses:
            mask |= _filled_ellipse(e, w, h)
        for shape in spec.distractors:
            if shape.kind == "segment":
                for x, y in shape.pixels():
                    if 0 <= x < w and 0 <= y < h:
                        mask[y, x] = True
            else:
                mask |= _filled_polygon(shape.vertices, w, h)
        image = np.where(mask, 255, 0).astype(np.uint8)
    else:
        image = np.where(edges, 255, 0).astype(np.uint8)

    if spec.noise_density > 0:
        rng = np.random.default_rng(spec.seed)
        u = rng.random((h, w))
        image = _apply_salt_pepper(image, u, spec.noise_density)
        edges = _apply_salt_pepper(edges, u, spec.noise_density)
    if spec.filled:
        edges = canny(image, canny_config)
    return Scene(image, edges, list(spec.ellipses))


def _apply_salt_pepper(arr: np.ndarray, u: np.ndarray, density: float) -> np.ndarray:
    out = arr.copy()
    salt = u < density / 2
    pepper = (u >= density / 2) & (u < density)
    if out.dtype == bool:
        out[salt] = True
        out[pepper] = False
    else:
        out[salt] = 255
        out[pepper] = 0
    return out


def add_salt_pepper(arr: np.ndarray, density: float, rng: np.random.Generator | int | None) -> np.ndarray:
    """Set each pixel to max (salt) or min (pepper), each with probability ``density / 2``.

    Works on ``uint8`` images and boolean edge maps; returns a new array.
    """
    if not 0.0 <= density < 0.5:
        raise ValueError("density must lie in [0, 0.5)")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return _apply_salt_pepper(np.asarray(arr), rng.random(np.shape(arr)), density)
