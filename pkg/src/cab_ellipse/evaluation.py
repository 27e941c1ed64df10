"""Detection accuracy scores: per-ellipse error, multiple error, success rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import EllipseParams

__all__ = [
    "EvalWeights",
    "RunReport",
    "MISS_PENALTY",
    "error_score",
    "match",
    "multiple_error",
    "success_rate",
    "summarize",
]

MISS_PENALTY = 2.0
NEAR_CIRCULAR_RATIO = 0.99


@dataclass(frozen=True)
class EvalWeights:
    """Weights for centre shift, mean radius mismatch and angle error (degrees)."""

    p1: float = 0.05
    p2: float = 0.1
    p3: float = 0.2

    def __post_init__(self):
        if not (self.p1 > 0 and self.p2 > 0 and self.p3 > 0):
            raise ValueError("evaluation weights must be positive")


@dataclass
class RunReport:
    es: list[float]
    me: float
    runtime: float = 0.0
    seed: int | None = None
    detections: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.me < 1.0

    def to_json(self, timing: bool = True) -> dict:
        return {
            "seed": self.seed,
            "ME": self.me,
            "success": self.success,
            "runtime_s": self.runtime if timing else 0.0,
        }


def _as_ellipse(d) -> EllipseParams:
    return d if isinstance(d, EllipseParams) else d.ellipse


def error_score(truth: EllipseParams, det: EllipseParams, w: EvalWeights | None = None) -> float:
    """Weighted error of a detected ellipse against its ground truth.

    ``P1 * centre shift (L1) + P2 * mean radius mismatch + P3 * angle error``
    with the angle error in degrees, taken modulo 180. The angle term is
    dropped when both ellipses are near-circular.
    """
    w = w or EvalWeights()
    centre = abs(truth.x0 - det.x0) + abs(truth.y0 - det.y0)
    radii = (abs(truth.r_max - det.r_max) + abs(truth.r_min - det.r_min)) / 2.0
    angle = 0.0
    both_round = (
        truth.r_min / truth.r_max > NEAR_CIRCULAR_RATIO
        and det.r_min / det.r_max > NEAR_CIRCULAR_RATIO
    )
    if not both_round:
        d = abs(math.degrees(truth.theta) - math.degrees(det.theta)) % 180.0
        angle = min(d, 180.0 - d)
    return w.p1 * centre + w.p2 * radii + w.p3 * angle


def match(
    truths: Sequence[EllipseParams], dets: Sequence, w: EvalWeights | None = None
) -> list[tuple[int, int, float]]:
    """Greedy one-to-one assignment by ascending error score.

    Returns ``(truth_index, detection_index, Es)`` triples; ties go to the
    lower truth index, then the lower detection index.
    """
    pairs = sorted(
        (error_score(t, _as_ellipse(d), w), i, j)
        for i, t in enumerate(truths)
        for j, d in enumerate(dets)
    )
    used_t: set[int] = set()
    used_d: set[int] = set()
    out = []
    for es, i, j in pairs:
        if i in used_t or j in used_d:
            continue
        used_t.add(i)
        used_d.add(j)
        out.append((i, j, es))
    return sorted(out)


def per_truth_errors(truths, dets, w: EvalWeights | None = None) -> list[float]:
    """Es for every ground truth; unmatched ones get ``MISS_PENALTY``."""
    es = [MISS_PENALTY] * len(truths)
    for i, _, e in match(truths, dets, w):
        es[i] = e
    return es


def multiple_error(truths: Sequence[EllipseParams], dets: Sequence, w: EvalWeights | None = None) -> float:
    """Mean error over the ground truths, with penalties for misses and extras.

    A missed ground truth contributes ``MISS_PENALTY``; every detection beyond
    the number of ground truths adds ``MISS_PENALTY / NC``.
    """
    nc = len(truths)
    if nc == 0:
        raise ValueError("ground truth is empty")
    es = per_truth_errors(truths, dets, w)
    surplus = max(0, len(dets) - nc)
    return (sum(es) + MISS_PENALTY * surplus) / nc


def success_rate(reports: Sequence[RunReport]) -> float:
    if not reports:
        raise ValueError("no reports")
    return 100.0 * sum(r.success for r in reports) / len(reports)


def summarize(reports: Sequence[RunReport], timing: bool = True) -> dict:
    """Batch report: per-run rows plus SR and mean/std of ME and runtime."""
    me = np.array([r.me for r in reports], dtype=np.float64)
    rt = np.array([r.runtime if timing else 0.0 for r in reports], dtype=np.float64)
    return {
        "per_run": [r.to_json(timing) for r in reports],
        "SR": success_rate(reports),
        "ME_mean": float(me.mean()),
        "ME_std": float(me.std()),
        "runtime_mean_s": float(rt.mean()),
        "runtime_std_s": float(rt.std()),
    }
