"""Global minimization of the penalized likelihood.

``exhaustive_search`` enumerates all 2^(N-1) configurations; ``genetic_search``
evolves a population of inclusion-indicator chromosomes. Both score through
``Objective``, which caches per-regime contributions and matches
``penalized_score`` exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
import threading

import numpy as np
from tqdm import tqdm

from shiftscan.config import worker_count
from shiftscan.core import ChangepointConfiguration, Series, enumerate_configurations, partition
from shiftscan.errors import ParameterError, SearchTooLargeError, ShiftscanError
from shiftscan.models import (
    PenalizedScore,
    PenaltyKind,
    SegmentModelKind,
    fit_gauss_trend_ar1,
    fit_poisson,
    gaussian_neg2loglik,
    penalized_score,
    penalty,
    segment_poisson_loglik,
    segment_rss,
    variance_floor,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_N = 24
TREND_AR1_MAX_N = 16


class Objective:
    """Penalized -2 ln L of configurations of one series, with caching.

    Gaussian i.i.d. and Poisson scores are assembled from cached per-regime
    terms summed in regime order, the same arithmetic ``penalized_score``
    performs, so totals agree bit for bit. Trend + AR(1) scores are cached
    per configuration. Safe to call from several threads.
    """

    def __init__(
        self,
        series: Series,
        model: SegmentModelKind | str,
        penalty_kind: PenaltyKind | str,
    ):
        self.series = series
        self.model = SegmentModelKind(model)
        self.penalty_kind = PenaltyKind(penalty_kind)
        self.evaluations = 0
        self._segments: dict[tuple[int, int], float] = {}
        self._configs: dict[tuple[int, ...], float] = {}
        self._lock = threading.Lock()
        self._floor = variance_floor(series.values)
        if self.model is SegmentModelKind.POISSON:
            # validates count data once up front
            fit_poisson(series, ChangepointConfiguration())

    def _segment_term(self, start: int, end: int) -> float:
        key = (start, end)
        term = self._segments.get(key)
        if term is None:
            values = self.series.segment(start, end)
            if self.model is SegmentModelKind.POISSON:
                term = segment_poisson_loglik(values)
            else:
                term = segment_rss(values)
            self._segments[key] = term
        return term

    def neg2loglik(self, config: ChangepointConfiguration) -> float:
        n = self.series.n
        if config.taus and config.taus[-1] == n:
            return math.inf
        if self.model is SegmentModelKind.GAUSS_TREND_AR1:
            cached = self._configs.get(config.taus)
            if cached is None:
                try:
                    cached = fit_gauss_trend_ar1(self.series, config).neg2loglik
                except ShiftscanError:
                    cached = math.inf
                self._configs[config.taus] = cached
            return cached
        terms = [self._segment_term(a, b) for a, b in partition(config, n)]
        if self.model is SegmentModelKind.POISSON:
            return -2.0 * math.fsum(terms)
        return gaussian_neg2loglik(math.fsum(terms), n, self._floor)[0]

    def total(self, config: ChangepointConfiguration) -> float:
        with self._lock:
            self.evaluations += 1
        return self.neg2loglik(config) + penalty(self.penalty_kind, config.m, self.series.n)

    def score(self, config: ChangepointConfiguration) -> PenalizedScore:
        return penalized_score(self.series, config, self.model, self.penalty_kind)


@dataclass(frozen=True)
class SearchResult:
    best_config: ChangepointConfiguration
    best_score: PenalizedScore
    evaluations: int
    history: tuple[float, ...] = ()


def _ranking(total: float, config: ChangepointConfiguration):
    return (total, *config.sort_key())


def exhaustive_search(
    series: Series,
    model: SegmentModelKind | str,
    penalty_kind: PenaltyKind | str,
    max_n: int | None = None,
    progress: bool = False,
) -> SearchResult:
    """Evaluate every configuration and return the global minimum.

    Ties go to fewer changepoints, then to the lexicographically smallest taus.
    """
    model = SegmentModelKind(model)
    if max_n is None:
        max_n = TREND_AR1_MAX_N if model is SegmentModelKind.GAUSS_TREND_AR1 else DEFAULT_MAX_N
    n = series.n
    if n > max_n:
        raise SearchTooLargeError(
            f"exhaustive search over N={n} would fit 2^{n - 1} = {2 ** (n - 1):,} "
            f"models (limit N <= {max_n}); use the genetic algorithm instead"
        )

    objective = Objective(series, model, penalty_kind)
    best_config = None
    best_key = None
    for config in tqdm(
        enumerate_configurations(n),
        total=2 ** (n - 1),
        desc="exhaustive",
        unit="fit",
        disable=not progress,
    ):
        key = _ranking(objective.total(config), config)
        if best_key is None or key < best_key:
            best_key, best_config = key, config

    logger.debug("Exhaustive search evaluated %d configurations", objective.evaluations)
    return SearchResult(best_config, objective.score(best_config), objective.evaluations)


@dataclass(frozen=True)
class GaSettings:
    population_size: int = 100
    max_generations: int = 500
    stagnation_limit: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1/(N-1)
    elitism_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ParameterError("population_size must be >= 2")
        if self.max_generations < 1 or self.stagnation_limit < 1:
            raise ParameterError("max_generations and stagnation_limit must be >= 1")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ParameterError("crossover_rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ParameterError("mutation_rate must lie in [0, 1]")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ParameterError("elitism_count must lie in [0, population_size]")


@dataclass
class Chromosome:
    """Inclusion indicators for changepoint times 2..N."""

    bits: np.ndarray
    fitness: float | None = field(default=None, compare=False)

    @cached_property
    def key(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    @cached_property
    def config(self) -> ChangepointConfiguration:
        return ChangepointConfiguration.from_bits(self.bits)

    def decode(self) -> ChangepointConfiguration:
        return self.config

    @classmethod
    def encode(cls, config: ChangepointConfiguration, n: int) -> Chromosome:
        return cls(config.to_bits(n))


class _Population:
    """Fitness evaluation with a cache keyed by chromosome bits."""

    def __init__(self, objective: Objective, pool: ThreadPoolExecutor | None):
        self.objective = objective
        self.pool = pool
        self.cache: dict[bytes, float] = {}

    def evaluate(self, chromosomes: list[Chromosome]) -> None:
        pending: dict[bytes, Chromosome] = {}
        for c in chromosomes:
            if c.key not in self.cache:
                pending.setdefault(c.key, c)
        if pending:
            configs = [c.decode() for c in pending.values()]
            if self.pool is not None and len(configs) > 1:
                totals = list(self.pool.map(self.objective.total, configs))
            else:
                totals = [self.objective.total(cfg) for cfg in configs]
            self.cache.update(zip(pending, totals, strict=True))
        for c in chromosomes:
            c.fitness = self.cache[c.key]


def _rank_key(c: Chromosome):
    return _ranking(c.fitness, c.decode())


def _initial_population(n_bits: int, size: int, rng: np.random.Generator) -> list[Chromosome]:
    population = [Chromosome(np.zeros(n_bits, dtype=bool))]
    while len(population) < size:
        bits = np.zeros(n_bits, dtype=bool)
        k = min(int(rng.integers(1, 4)), n_bits)
        bits[rng.choice(n_bits, size=k, replace=False)] = True
        population.append(Chromosome(bits))
    return population


def _tournament(population: list[Chromosome], rng: np.random.Generator) -> Chromosome:
    i, j = rng.integers(len(population), size=2)
    a, b = population[i], population[j]
    return a if _rank_key(a) <= _rank_key(b) else b


def genetic_search(
    series: Series,
    model: SegmentModelKind | str,
    penalty_kind: PenaltyKind | str,
    settings: GaSettings | None = None,
    workers: int | None = None,
    progress: bool = False,
) -> SearchResult:
    """Minimize the penalized likelihood with a generational GA.

    Each generation keeps the ``elitism_count`` best chromosomes and fills the
    rest by size-2 tournaments, uniform crossover and per-bit mutation. One RNG
    stream drives all variation, so results depend only on the seed; threads
    are used for fitness evaluation only.
    """
    settings = settings or GaSettings()
    n = series.n
    if n < 4:
        raise ParameterError(f"genetic search needs N >= 4, got {n}")
    n_bits = n - 1
    mutation_rate = settings.mutation_rate
    if mutation_rate is None:
        mutation_rate = 1.0 / n_bits

    rng = np.random.default_rng(settings.seed)
    workers = workers or worker_count()
    objective = Objective(series, model, penalty_kind)

    with ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext() as pool:
        evaluator = _Population(objective, pool)
        population = _initial_population(n_bits, settings.population_size, rng)
        evaluator.evaluate(population)
        population.sort(key=_rank_key)
        best = population[0]
        history = [best.fitness]
        stagnant = 0
        generation = 0

        with tqdm(
            total=settings.max_generations, desc="ga", unit="gen", disable=not progress
        ) as bar:
            while generation < settings.max_generations and stagnant < settings.stagnation_limit:
                generation += 1
                population = _next_generation(population, settings, mutation_rate, rng)
                evaluator.evaluate(population)
                population.sort(key=_rank_key)
                bar.update(1)

                leader = population[0]
                stagnant = 0 if leader.fitness < best.fitness else stagnant + 1
                if _rank_key(leader) < _rank_key(best):
                    best = leader
                history.append(best.fitness)

    logger.debug(
        "GA stopped at generation %d (%d stagnant) after %d evaluations",
        generation, stagnant, objective.evaluations,
    )
    best_config = best.decode()
    return SearchResult(
        best_config, objective.score(best_config), objective.evaluations, tuple(history)
    )


def _next_generation(
    population: list[Chromosome],
    settings: GaSettings,
    mutation_rate: float,
    rng: np.random.Generator,
) -> list[Chromosome]:
    n_bits = len(population[0].bits)
    offspring = [Chromosome(c.bits.copy()) for c in population[: settings.elitism_count]]
    while len(offspring) < settings.population_size:
        mother = _tournament(population, rng)
        father = _tournament(population, rng)
        if rng.random() < settings.crossover_rate:
            bits = np.where(rng.random(n_bits) < 0.5, mother.bits, father.bits)
        else:
            bits = mother.bits.copy()
        bits ^= rng.random(n_bits) < mutation_rate
        offspring.append(Chromosome(bits))
    return offspring
