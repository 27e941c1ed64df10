"""Command-line interface: ``cab-ellipse {detect,synth,eval,bench}``.

Exit codes: 0 success (for ``detect``: at least one ellipse), 2 no ellipse
found, 1 any error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .cab import CAB, Bounds, CabConfig
from .detector import DetectorConfig, EllipseDetector, TooFewEdgePixels
from .edges import CannyConfig, canny
from .evaluation import EvalWeights, RunReport, multiple_error, per_truth_errors, summarize
from .pnm import ImageFormatError, load_edge_map, load_gray, save_edge_map, save_gray, save_ppm
from .raster import rasterize
from .synth import ellipse_from_json, ellipse_to_json, load_spec, render

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONE = 2

DETECTION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["image", "seed", "config", "detections", "runtime_ms"],
    "properties": {
        "image": {"type": "string"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "runtime_ms": {"type": "number", "minimum": 0},
        "detections": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["x0", "y0", "r_max", "r_min", "theta_deg", "fitness", "n_s"],
                "properties": {
                    "x0": {"type": "number"},
                    "y0": {"type": "number"},
                    "r_max": {"type": "number", "exclusiveMinimum": 0},
                    "r_min": {"type": "number", "exclusiveMinimum": 0},
                    "theta_deg": {"type": "number", "minimum": -90, "maximum": 90},
                    "fitness": {"type": "number", "minimum": 0, "maximum": 1},
                    "n_s": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
    },
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with every other failure; 2 means "none found"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_cab_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("optimizer")
    g.add_argument("--population", type=int, default=30, help="population size N_p")
    g.add_argument("--memory", type=int, default=12, help="memory size B")
    g.add_argument("--prob-h", type=float, default=0.5, help="probability of using M_h in moves")
    g.add_argument("--prob-p", type=float, default=0.1, help="random-move probability")
    g.add_argument("--iterations", type=int, default=200, help="generations NI")
    g.add_argument("--perturbation", type=float, default=0.01, help="elite perturbation, fraction of range")


def _add_detector_flags(p: argparse.ArgumentParser) -> None:
    _add_cab_flags(p)
    g = p.add_argument_group("detector")
    g.add_argument("--r-min-range", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--r-max-range", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--sensitivity", type=float, default=2.0)
    g.add_argument("--fth-divisor", type=float, default=10.0)
    g.add_argument("--memory-rho", type=float, default=5.0, help="memory competition radius (px)")
    g = p.add_argument_group("edges")
    g.add_argument("--edges", action="store_true", help="input is a binary edge map, skip Canny")
    g.add_argument("--sigma", type=float, default=1.4)
    g.add_argument("--low-frac", type=float, default=0.1)
    g.add_argument("--high-frac", type=float, default=0.3)


def _cab_config(a) -> CabConfig:
    return CabConfig(
        population_size=a.population,
        memory_size=a.memory,
        prob_h=a.prob_h,
        prob_p=a.prob_p,
        iterations=a.iterations,
        perturbation_frac=a.perturbation,
    )


def _detector(a) -> EllipseDetector:
    cfg = DetectorConfig(
        cab=_cab_config(a),
        r_min_range=tuple(a.r_min_range) if a.r_min_range else None,
        r_max_range=tuple(a.r_max_range) if a.r_max_range else None,
        sensitivity=a.sensitivity,
        f_th_divisor=a.fth_divisor,
        memory_rho=a.memory_rho,
    )
    return EllipseDetector(cfg, CannyConfig(a.sigma, a.low_frac, a.high_frac))


def _config_json(det: EllipseDetector, shape) -> dict:
    h, w = shape
    cfg = asdict(det.config.resolved(w, h))
    cfg["canny"] = asdict(det.canny_config)
    for k in ("r_min_range", "r_max_range"):
        cfg[k] = list(cfg[k])
    return cfg


def _load_input(a) -> tuple[np.ndarray, np.ndarray]:
    """Return (gray image, edge map) for the input path."""
    path = Path(a.input)
    if not path.exists():
        raise CliError(f"input not found: {path}")
    if a.edges:
        edges = load_edge_map(path)
        return np.where(edges, 255, 0).astype(np.uint8), edges
    gray = load_gray(path)
    return gray, canny(gray, CannyConfig(a.sigma, a.low_frac, a.high_frac))


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _overlay(gray: np.ndarray, detections) -> np.ndarray:
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    h, w = gray.shape
    for d in detections:
        s = rasterize(d.ellipse, w, h)
        rgb[s[:, 1], s[:, 0]] = (255, 0, 0)
    return rgb


def cmd_detect(a) -> int:
    gray, edges = _load_input(a)
    det = _detector(a)
    t0 = time.perf_counter()
    try:
        found = det.detect(edges, seed=a.seed)
    except TooFewEdgePixels as exc:
        print(f"warning: {exc}", file=sys.stderr)
        found = []
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    report = {
        "image": str(a.input),
        "seed": a.seed,
        "config": _config_json(det, edges.shape),
        "detections": [d.to_json() for d in found],
        "runtime_ms": 0.0 if a.no_timestamp else runtime_ms,
    }
    _write_json(report, a.out)
    if a.overlay:
        save_ppm(a.overlay, _overlay(gray, found))
    return EXIT_OK if found else EXIT_NONE


def cmd_synth(a) -> int:
    try:
        spec = load_spec(a.spec)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read scene spec {a.spec}: {exc}") from exc
    scene = render(spec)
    save_gray(a.image, scene.image)
    save_edge_map(a.edge_map, scene.edges)
    truth = {"ellipses": [ellipse_to_json(e, i) for i, e in enumerate(scene.truth)]}
    Path(a.truth).write_text(json.dumps(truth, indent=2) + "\n")
    return EXIT_OK


def _load_truth(path: str):
    p = Path(path)
    if not p.exists():
        raise CliError(f"ground truth not found: {p}")
    try:
        data = json.loads(p.read_text())
        items = data["ellipses"] if isinstance(data, dict) else data
        return [ellipse_from_json(d) for d in items]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CliError(f"malformed ground truth {p}: {exc}") from exc


def _eval_one(args) -> RunReport:
    det, edges, truths, weights, seed = args
    t0 = time.perf_counter()
    try:
        found = det.detect(edges, seed=seed)
    except TooFewEdgePixels:
        found = []
    runtime = time.perf_counter() - t0
    return RunReport(
        es=per_truth_errors(truths, found, weights),
        me=multiple_error(truths, found, weights),
        runtime=runtime,
        seed=seed,
    )


def cmd_eval(a) -> int:
    truths = _load_truth(a.truth)
    if not truths:
        raise CliError("ground truth is empty")
    if a.runs < 1:
        raise CliError("--runs must be at least 1")
    _, edges = _load_input(a)
    det = _detector(a)
    weights = EvalWeights(a.p1, a.p2, a.p3)
    jobs = [(det, edges, truths, weights, a.seed + k) for k in range(a.runs)]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as pool:
            reports = list(pool.map(_eval_one, jobs))
    else:
        reports = [_eval_one(j) for j in jobs]
    summary = summarize(reports, timing=not a.no_timestamp)
    summary = {"image": str(a.input), "truth": str(a.truth), "runs": a.runs, **summary}
    _write_json(summary, a.out)
    return EXIT_OK


def _gauss_peaks(centres, width):
    centres = [np.asarray(c, dtype=np.float64) for c in centres]

    def f(x):
        return max(math.exp(-float(np.sum((x - c) ** 2)) / width) for c in centres)

    return f


BENCHMARKS = {
    # name: (fitness, bounds, optima)
    "bimodal": (
        _gauss_peaks([(0.25, 0.25), (0.75, 0.75)], 0.02),
        ([0.0, 0.0], [1.0, 1.0]),
        [(0.25, 0.25), (0.75, 0.75)],
    ),
    "four-peaks": (
        _gauss_peaks([(0.2, 0.2), (0.2, 0.8), (0.8, 0.2), (0.8, 0.8)], 0.01),
        ([0.0, 0.0], [1.0, 1.0]),
        [(0.2, 0.2), (0.2, 0.8), (0.8, 0.2), (0.8, 0.8)],
    ),
    "himmelblau": (
        lambda x: -((x[0] ** 2 + x[1] - 11) ** 2 + (x[0] + x[1] ** 2 - 7) ** 2),
        ([-6.0, -6.0], [6.0, 6.0]),
        [(3.0, 2.0), (-2.805118, 3.131312), (-3.779310, -3.283186), (3.584428, -1.848126)],
    ),
}


def cmd_bench(a) -> int:
    fitness, (lo, hi), optima = BENCHMARKS[a.function]
    bounds = Bounds(lo, hi)
    cfg = CabConfig(
        population_size=a.population,
        memory_size=a.memory,
        prob_h=a.prob_h,
        prob_p=a.prob_p,
        iterations=a.iterations,
        perturbation_frac=a.perturbation,
        rho=a.rho,
    )
    memory = CAB(bounds, fitness, cfg).run(a.seed)
    span = bounds.span
    found = 0
    print(f"function {a.function}  seed {a.seed}  generations {cfg.iterations}")
    for opt in optima:
        opt = np.asarray(opt)
        d = [float(np.linalg.norm((m.position - opt) / span)) for m in memory]
        k = int(np.argmin(d))
        ok = d[k] <= a.tolerance
        found += ok
        pos = ", ".join(f"{v:.4f}" for v in memory[k].position)
        print(
            f"  optimum ({', '.join(f'{v:.4f}' for v in opt)}): nearest ({pos}) "
            f"fitness {memory[k].fitness:.6f} distance {d[k]:.4f} {'FOUND' if ok else 'missed'}"
        )
    print(f"located {found}/{len(optima)} optima within {a.tolerance}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cab-ellipse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="detect ellipses in an image")
    d.add_argument("input", help="PGM/PPM image (or edge map with --edges)")
    d.add_argument("--out", help="detections JSON (default: stdout)")
    d.add_argument("--overlay", help="write a PPM with detections drawn in red")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--no-timestamp", action="store_true", help="zero the runtime field")
    _add_detector_flags(d)
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("synth", help="render a synthetic scene from a JSON spec")
    s.add_argument("spec", help="scene spec JSON")
    s.add_argument("--image", required=True, help="output gray PGM")
    s.add_argument("--edge-map", required=True, help="output edge-map PGM")
    s.add_argument("--truth", required=True, help="output ground-truth JSON")
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="seeded detection batch scored against ground truth")
    e.add_argument("input")
    e.add_argument("--truth", required=True)
    e.add_argument("--runs", type=int, default=35)
    e.add_argument("--seed", type=int, default=0, help="first seed; runs use seed, seed+1, ...")
    e.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    e.add_argument("--out", help="report JSON (default: stdout)")
    e.add_argument("--no-timestamp", action="store_true", help="zero all runtime fields")
    e.add_argument("--p1", type=float, default=0.05)
    e.add_argument("--p2", type=float, default=0.1)
    e.add_argument("--p3", type=float, default=0.2)
    _add_detector_flags(e)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run the bare optimizer on multimodal test functions")
    b.add_argument("--function", choices=sorted(BENCHMARKS), default="bimodal")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--rho", type=float, default=0.02, help="competition radius (normalized units)")
    b.add_argument("--tolerance", type=float, default=0.05)
    _add_cab_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ImageFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
