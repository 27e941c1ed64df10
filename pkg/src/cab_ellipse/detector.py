"""Multi-ellipse detection driven by the CAB optimizer.

A candidate is a genotype of five continuous indices into the edge vector;
the ellipse through the five selected edge pixels is scored by the fraction
of its rasterized perimeter that lands on edge pixels. After one
optimization run, the historical memory is scanned in fitness order and
every element that is distinct from all accepted ellipses and fit enough is
reported as a detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cab import CAB, Bounds, CabConfig, ScoredPosition
from .edges import CannyConfig, canny, edge_vector
from .geometry import (
    DegenerateConfiguration,
    EllipseParams,
    NotAnEllipse,
    conic_to_ellipse,
    fit_conic_five_points,
)
from .raster import rasterize

__all__ = [
    "DetectorConfig",
    "Detection",
    "InvalidCandidate",
    "TooFewEdgePixels",
    "EllipseDetector",
    "decode",
    "fitness",
    "distinctiveness",
    "similarity_threshold",
    "extract",
    "detect",
]

NEAR_CIRCLE_PX = 1.0


class InvalidCandidate(ValueError):
    pass


class TooFewEdgePixels(ValueError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    """Detector settings.

    ``r_min_range`` / ``r_max_range`` are the feasible semi-axis ranges in
    pixels; ``None`` means ``[5, min(width, height) / 2]`` for the image at
    hand. ``sensitivity`` divides the summed range widths to give the
    similarity threshold; ``f_th_divisor`` sets the fitness cutoff
    ``F_1 / f_th_divisor`` relative to the best detection.

    ``memory_rho`` is the competition radius of the optimizer's historical
    memory, in distinctiveness units (pixels). It is deliberately much smaller
    than the similarity threshold: the memory should keep near-duplicates of
    every real ellipse, which :func:`extract` then merges. ``None`` uses the
    similarity threshold itself, which leaves most memory slots to far-off
    spurious candidates.
    """

    cab: CabConfig = field(default_factory=CabConfig)
    r_min_range: tuple[float, float] | None = None
    r_max_range: tuple[float, float] | None = None
    sensitivity: float = 2.0
    f_th_divisor: float = 10.0
    memory_rho: float | None = 5.0

    def __post_init__(self):
        for name in ("r_min_range", "r_max_range"):
            rng = getattr(self, name)
            if rng is not None:
                lo, hi = rng
                if not 0 < lo < hi:
                    raise ValueError(f"{name} must satisfy 0 < low < high")
        if not self.sensitivity > 0:
            raise ValueError("sensitivity must be positive")
        if not self.f_th_divisor > 0:
            raise ValueError("f_th_divisor must be positive")
        if self.memory_rho is not None and self.memory_rho < 0:
            raise ValueError("memory_rho must be non-negative")

    def resolved(self, width: int, height: int) -> "DetectorConfig":
        """Fill default radius ranges from the image size."""
        default = (5.0, min(width, height) / 2.0)
        return replace(
            self,
            r_min_range=self.r_min_range or default,
            r_max_range=self.r_max_range or default,
        )


@dataclass(frozen=True)
class Detection:
    ellipse: EllipseParams
    fitness: float
    n_s: int

    def to_json(self) -> dict:
        e = self.ellipse
        return {
            "x0": e.x0,
            "y0": e.y0,
            "r_max": e.r_max,
            "r_min": e.r_min,
            "theta_deg": math.degrees(e.theta),
            "fitness": self.fitness,
            "n_s": self.n_s,
        }


def _indices(g: Sequence[float], n_e: int) -> tuple[int, ...]:
    idx = tuple(min(max(int(math.floor(v + 0.5)), 0), n_e - 1) for v in g)
    if len(set(idx)) != 5:
        raise InvalidCandidate("genotype does not select five distinct edge points")
    return tuple(sorted(idx))


def _decode_indices(idx: tuple[int, ...], points: np.ndarray, cfg: DetectorConfig) -> EllipseParams:
    try:
        e = conic_to_ellipse(fit_conic_five_points(points[list(idx)].tolist()))
    except (DegenerateConfiguration, NotAnEllipse) as exc:
        raise InvalidCandidate(str(exc)) from exc
    lo_min, hi_min = cfg.r_min_range
    lo_max, hi_max = cfg.r_max_range
    if not (lo_min <= e.r_min <= hi_min and lo_max <= e.r_max <= hi_max):
        raise InvalidCandidate("semi-axes outside the feasible ranges")
    return e


def decode(g: Sequence[float], points: np.ndarray, cfg: DetectorConfig) -> EllipseParams:
    """Ellipse through the five edge points a genotype selects.

    ``cfg`` must have its radius ranges resolved. Raises InvalidCandidate for
    repeated indices, degenerate or non-elliptic conics, and ellipses whose
    semi-axes fall outside the feasible ranges.
    """
    points = np.asarray(points)
    if len(points) < 5:
        raise TooFewEdgePixels(f"need at least 5 edge points, have {len(points)}")
    return _decode_indices(_indices(g, len(points)), points, cfg)


def fitness(e: EllipseParams, edges: np.ndarray) -> float:
    """Fraction of the rasterized perimeter that falls on edge pixels.

    This is ``1 - J`` for the matching error ``J``; 0 when nothing of the
    perimeter lies inside the image.
    """
    return _score(e, edges)[0]


def _score(e: EllipseParams, edges: np.ndarray) -> tuple[float, int]:
    h, w = edges.shape
    s = rasterize(e, w, h)
    if len(s) == 0:
        return 0.0, 0
    hits = int(np.count_nonzero(edges[s[:, 1], s[:, 0]]))
    return hits / len(s), len(s)


def _angle_gap(t1: float, t2: float) -> float:
    d = abs(t1 - t2) % math.pi
    return min(d, math.pi - d)


def distinctiveness(A: EllipseParams, B: EllipseParams) -> float:
    """L1 mismatch of centre, semi-axes and orientation (radians, modulo pi).

    Orientation is ignored when either ellipse is near-circular.
    """
    d = abs(A.x0 - B.x0) + abs(A.y0 - B.y0) + abs(A.r_min - B.r_min) + abs(A.r_max - B.r_max)
    if A.r_max - A.r_min >= NEAR_CIRCLE_PX and B.r_max - B.r_min >= NEAR_CIRCLE_PX:
        d += _angle_gap(A.theta, B.theta)
    return d


def similarity_threshold(cfg: DetectorConfig) -> float:
    """``Th = (|r_max^h - r_max^l| + |r_min^h - r_min^l|) / s``."""
    lo_max, hi_max = cfg.r_max_range
    lo_min, hi_min = cfg.r_min_range
    return (abs(hi_max - lo_max) + abs(hi_min - lo_min)) / cfg.sensitivity


def extract(
    candidates: Sequence[tuple[EllipseParams, float]],
    cfg: DetectorConfig,
    edges: np.ndarray | None = None,
) -> list[Detection]:
    """Pick the distinct, significant ellipses out of a fitness-sorted memory.

    ``candidates`` holds ``(ellipse, fitness)`` pairs in descending fitness
    order. The first is always accepted; each later one is accepted when its
    distinctiveness to every accepted detection exceeds the similarity
    threshold and its fitness is at least ``F_1 / f_th_divisor``. Candidates
    with zero best fitness yield no detections. When ``edges`` is given,
    ``n_s`` is the clipped perimeter size on that map.
    """
    if not candidates:
        return []
    th = similarity_threshold(cfg)
    f1 = candidates[0][1]
    if f1 <= 0:
        return []
    cutoff = f1 / cfg.f_th_divisor
    accepted: list[Detection] = []
    for e, f in candidates:
        if accepted and f < cutoff:
            break
        if all(distinctiveness(e, d.ellipse) > th for d in accepted):
            n_s = _score(e, edges)[1] if edges is not None else 0
            accepted.append(Detection(e, float(f), n_s))
    return accepted


class EllipseDetector:
    """Detect several ellipses in one optimization run.

    The instance holds only configuration and is safe to share between
    threads; every :meth:`detect` call builds its own optimizer state.
    """

    def __init__(self, config: DetectorConfig | None = None, canny_config: CannyConfig | None = None):
        self.config = config or DetectorConfig()
        self.canny_config = canny_config or CannyConfig()

    def edge_map(self, image: np.ndarray) -> np.ndarray:
        """Bool arrays pass through as edge maps; anything else goes through Canny."""
        image = np.asarray(image)
        if image.dtype == bool:
            return image
        return canny(image, self.canny_config)

    def optimize(self, edges: np.ndarray, seed=None) -> tuple[list[ScoredPosition], "_Problem"]:
        problem = _Problem(edges, self.config)
        rho = problem.th if self.config.memory_rho is None else self.config.memory_rho
        cab = CAB(
            Bounds([0.0] * 5, [problem.n_e - 1.0] * 5),
            problem.fitness,
            replace(self.config.cab, rho=rho),
            distance=problem.distance,
        )
        return cab.run(seed), problem

    def detect(self, image: np.ndarray, seed=None) -> list[Detection]:
        edges = self.edge_map(image)
        memory, problem = self.optimize(edges, seed)
        cands = []
        for m in memory:
            e = problem.ellipse(m.position)
            if e is not None:
                cands.append((e, m.fitness))
        return extract(cands, problem.cfg, edges)


class _Problem:
    """Per-run fitness and distance with memoized decoding.

    Many genotypes round to the same index set, so decode results and scores
    are cached by the sorted index tuple.
    """

    def __init__(self, edges: np.ndarray, cfg: DetectorConfig):
        self.edges = np.asarray(edges, dtype=bool)
        h, w = self.edges.shape
        self.points = edge_vector(self.edges)
        self.n_e = len(self.points)
        if self.n_e < 5:
            raise TooFewEdgePixels(f"need at least 5 edge pixels, found {self.n_e}")
        self.cfg = cfg.resolved(w, h)
        self.th = similarity_threshold(self.cfg)
        self._cache: dict[tuple[int, ...], tuple[EllipseParams | None, float]] = {}
        self._by_position: dict[bytes, tuple[EllipseParams | None, float]] = {}

    def _lookup(self, g: np.ndarray) -> tuple[EllipseParams | None, float]:
        key = g.tobytes()
        hit = self._by_position.get(key)
        if hit is None:
            hit = self._evaluate(g)
            self._by_position[key] = hit
        return hit

    def _evaluate(self, g: np.ndarray) -> tuple[EllipseParams | None, float]:
        try:
            idx = _indices(g, self.n_e)
        except InvalidCandidate:
            return None, 0.0
        hit = self._cache.get(idx)
        if hit is None:
            try:
                e = _decode_indices(idx, self.points, self.cfg)
                hit = (e, _score(e, self.edges)[0])
            except InvalidCandidate:
                hit = (None, 0.0)
            self._cache[idx] = hit
        return hit

    def ellipse(self, g: np.ndarray) -> EllipseParams | None:
        return self._lookup(g)[0]

    def fitness(self, g: np.ndarray) -> float:
        return self._lookup(g)[1]

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        # invalid candidates never crowd anything out; only fitness ranks them
        a = self._lookup(p)[0]
        b = self._lookup(q)[0]
        if a is None or b is None:
            return math.inf
        return distinctiveness(a, b)


def detect(
    image: np.ndarray,
    config: DetectorConfig | None = None,
    seed=None,
    canny_config: CannyConfig | None = None,
) -> list[Detection]:
    """Detect ellipses in a grayscale image or a boolean edge map."""
    return EllipseDetector(config, canny_config).detect(image, seed)
