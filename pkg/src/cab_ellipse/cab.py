"""Collective Animal Behavior (CAB) multimodal optimizer.

A population of animal positions is evolved with four operators: keep the
best individuals (perturbed copies of the historical memory), move towards
or away from the nearest memory element, move randomly, and compete for
space. Competition keeps the historical memory ``M_h`` populated with
mutually distant solutions, so a single run yields several optima.

Fitness is maximized. The distance used for competition and for "nearest
memory element" lookups is pluggable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Bounds",
    "CabConfig",
    "ScoredPosition",
    "CabState",
    "CAB",
    "euclidean",
    "normalized_euclidean",
    "default_rho",
    "attract",
    "update_memory",
]

FitnessFn = Callable[[np.ndarray], float]
DistanceFn = Callable[[np.ndarray, np.ndarray], float]
MapFn = Callable[[FitnessFn, Iterable[np.ndarray]], Iterable[float]]


@dataclass(frozen=True)
class Bounds:
    low: np.ndarray
    high: np.ndarray

    def __init__(self, low: Sequence[float], high: Sequence[float]):
        low = np.asarray(low, dtype=np.float64).ravel()
        high = np.asarray(high, dtype=np.float64).ravel()
        if low.shape != high.shape or low.size == 0:
            raise ValueError("bounds must be non-empty vectors of equal length")
        if not np.all(low < high):
            raise ValueError("every lower bound must be below its upper bound")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return self.low.size

    @property
    def span(self) -> np.ndarray:
        return self.high - self.low

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.low), self.high)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.low + rng.random(self.dim) * self.span


@dataclass(frozen=True)
class CabConfig:
    """Optimizer settings; defaults are the published detector parameters."""

    population_size: int = 30
    memory_size: int = 12
    prob_h: float = 0.5
    prob_p: float = 0.1
    iterations: int = 200
    rho: float | None = None
    perturbation_frac: float = 0.01

    def __post_init__(self):
        if self.memory_size < 1:
            raise ValueError("memory_size must be at least 1")
        if self.memory_size >= self.population_size:
            raise ValueError("memory_size must be smaller than population_size")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        for name in ("prob_h", "prob_p"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.perturbation_frac < 0:
            raise ValueError("perturbation_frac must be non-negative")
        if self.rho is not None and self.rho < 0:
            raise ValueError("rho must be non-negative")


@dataclass
class ScoredPosition:
    position: np.ndarray
    fitness: float


@dataclass
class CabState:
    population: list[ScoredPosition]
    memory_g: list[ScoredPosition]
    memory_h: list[ScoredPosition]
    generation: int = 0
    history: list[float] = field(default_factory=list)


def euclidean(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sqrt(np.sum((p - q) ** 2)))


def normalized_euclidean(bounds: Bounds) -> DistanceFn:
    """Euclidean distance after mapping every dimension onto [0, 1]."""
    span = bounds.span

    def dist(p, q):
        return float(np.sqrt(np.sum(((p - q) / span) ** 2)))

    return dist


def default_rho(bounds: Bounds) -> float:
    """Competition radius ``prod(range_j) / (10 D)`` on unit-normalized bounds."""
    return 1.0 / (10.0 * bounds.dim)


def sort_desc(items: list[ScoredPosition]) -> list[ScoredPosition]:
    """Stable sort by descending fitness (earlier items win ties)."""
    return sorted(items, key=lambda s: -s.fitness)


def update_memory(
    memory_h: Sequence[ScoredPosition],
    memory_g: Sequence[ScoredPosition],
    rho: float,
    distance: DistanceFn,
    capacity: int,
) -> list[ScoredPosition]:
    """Merge both memories and resolve competition for space.

    Elements are scanned from fittest to weakest; one is kept only when it
    lies at least ``rho`` from everything kept so far. At most ``capacity``
    survivors are returned.
    """
    kept: list[ScoredPosition] = []
    for cand in sort_desc(list(memory_h) + list(memory_g)):
        if all(distance(cand.position, k.position) >= rho for k in kept):
            kept.append(cand)
            if len(kept) == capacity:
                break
    return kept


def attract(x: np.ndarray, target: np.ndarray, r: float, sign: float) -> np.ndarray:
    """Move ``x`` by ``sign * r`` times its offset to ``target``."""
    return x + sign * r * (target - x)


def nearest(x: np.ndarray, memory: Sequence[ScoredPosition], distance: DistanceFn) -> np.ndarray:
    best = memory[0].position
    best_d = distance(x, best)
    for m in memory[1:]:
        d = distance(x, m.position)
        if d < best_d:
            best, best_d = m.position, d
    return best


class CAB:
    """CAB optimizer bound to a search box, fitness and distance.

    Parameters
    ----------
    bounds : Bounds
        Search box; every evaluated position is clamped into it.
    fitness : callable
        ``fitness(position) -> float``, maximized. Must be safe for
        concurrent calls when a parallel ``map_fn`` is supplied.
    config : CabConfig, optional
    distance : callable, optional
        Metric for competition and nearest-neighbour lookups. Defaults to
        Euclidean distance on unit-normalized bounds.
    map_fn : callable, optional
        ``map``-like evaluator for one generation's fitness calls, e.g.
        ``ThreadPoolExecutor().map``. Results must come back in order.
    """

    def __init__(
        self,
        bounds: Bounds,
        fitness: FitnessFn,
        config: CabConfig | None = None,
        distance: DistanceFn | None = None,
        map_fn: MapFn | None = None,
    ):
        self.bounds = bounds
        self.fitness = fitness
        self.config = config or CabConfig()
        self.distance = distance or normalized_euclidean(bounds)
        self.rho = self.config.rho if self.config.rho is not None else default_rho(bounds)
        self.map_fn = map_fn or map

    def evaluate(self, positions: list[np.ndarray]) -> list[ScoredPosition]:
        scores = list(self.map_fn(self.fitness, positions))
        return [ScoredPosition(p, float(f)) for p, f in zip(positions, scores)]

    def initialize(self, rng: np.random.Generator) -> CabState:
        cfg = self.config
        positions = [self.bounds.sample(rng) for _ in range(cfg.population_size)]
        population = sort_desc(self.evaluate(positions))
        memory_g = population[: cfg.memory_size]
        return CabState(population, memory_g, list(memory_g))

    def keep_best(self, state: CabState, rng: np.random.Generator) -> list[np.ndarray]:
        """First B new positions: perturbed copies of the historical memory.

        Memory elements are reused cyclically when fewer than B are stored.
        """
        cfg = self.config
        mem = state.memory_h
        amp = cfg.perturbation_frac * self.bounds.span
        out = []
        for l in range(cfg.memory_size):
            v = rng.uniform(-1.0, 1.0, self.bounds.dim) * amp
            out.append(self.bounds.clip(mem[l % len(mem)].position + v))
        return out

    def move_or_randomize(self, state: CabState, rng: np.random.Generator) -> list[np.ndarray]:
        """Positions B+1..N_p: random restart with probability P, otherwise
        attraction/repulsion towards the nearest M_h (probability H) or M_g
        element."""
        cfg = self.config
        out = []
        for x in state.population[cfg.memory_size :]:
            if rng.random() < cfg.prob_p:
                out.append(self.bounds.sample(rng))
                continue
            memory = state.memory_h if rng.random() < cfg.prob_h else state.memory_g
            r = rng.random()
            sign = 1.0 if rng.random() < 0.5 else -1.0
            target = nearest(x.position, memory, self.distance)
            out.append(self.bounds.clip(attract(x.position, target, r, sign)))
        return out

    def step(self, state: CabState, rng: np.random.Generator) -> CabState:
        """One generation: memory update, new positions, evaluation, sort."""
        cfg = self.config
        memory_g = state.population[: cfg.memory_size]
        memory_h = update_memory(state.memory_h, memory_g, self.rho, self.distance, cfg.memory_size)
        state = CabState(state.population, memory_g, memory_h, state.generation, state.history)
        positions = self.keep_best(state, rng) + self.move_or_randomize(state, rng)
        population = sort_desc(self.evaluate(positions))
        history = state.history + [memory_h[0].fitness]
        return CabState(population, memory_g, memory_h, state.generation + 1, history)

    def run(self, seed: int | np.random.Generator | None = None) -> list[ScoredPosition]:
        """Run the configured number of generations; return ``M_h``, fittest first."""
        return self.run_state(seed).memory_h

    def run_state(self, seed: int | np.random.Generator | None = None) -> CabState:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        state = self.initialize(rng)
        for _ in range(self.config.iterations):
            state = self.step(state, rng)
        state.memory_h = sort_desc(state.memory_h)
        return state
