"""Two-subpopulation PSO feature selection with learned feature weights.

The population is split in half. The first half flies ordinary PSO with an
extra pull towards the second half's best particle. The second half does not
fly at all: each generation it draws fresh masks from the shared feature
weights, which both halves keep refining from their accuracy changes.

A plain single-swarm PSO runner with the same evaluation machinery is
provided as the baseline.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .classifier import EvalOutcome, cv_accuracy
from .dataset import Dataset, FoldPlan, stratified_kfold
from .swarm import (
    BestRecords,
    Particle,
    PsoParams,
    binarize,
    init_population,
    mask_to_position,
    mel_step,
    pso_step,
    repair_mask,
    update_bests,
)
from .weights import FeatureWeights, MaskDelta, roulette_sample, top_k, update_weights


@dataclass(frozen=True)
class MelConfig:
    np: int = 20
    iterations: int = 100
    pso: PsoParams = field(default_factory=PsoParams)
    alpha: float = 0.9
    beta: float = 0.1
    k_nn: int = 3
    cv_folds: int = 5
    seed: int = 0
    repeats: int = 10
    subset_policy: str = "uniform"
    bernoulli_scale: float = 0.5

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not math.isclose(self.alpha + self.beta, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError("alpha + beta must equal 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.np < 2 or self.np % 2:
            raise ValueError(f"population size must be even and >= 2, got {self.np}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.k_nn < 1:
            raise ValueError("k_nn must be >= 1")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.subset_policy not in ("uniform", "bernoulli"):
            raise ValueError(f"unknown subset policy {self.subset_policy!r}")

    def with_seed(self, seed: int) -> "MelConfig":
        return replace(self, seed=seed)


class TracePoint(NamedTuple):
    best_fitness: float
    best_accuracy: float
    best_subset_size: int


@dataclass
class RunReport:
    algorithm: str
    seed: int
    best_mask: np.ndarray
    best_accuracy: float
    best_fitness: float
    trace: list[TracePoint]
    wall_time: float
    n_evaluations: int
    weight_trace: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def best_subset_size(self) -> int:
        return int(np.count_nonzero(self.best_mask))

    @property
    def selected_features(self) -> np.ndarray:
        return np.flatnonzero(self.best_mask)


def fitness(error_rate: float, n_selected: int, n_total: int, alpha: float = 0.9, beta: float = 0.1) -> float:
    """Weighted sum of error rate and selected-feature ratio (minimised)."""
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"error_rate must lie in [0, 1], got {error_rate}")
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    if not 1 <= n_selected <= n_total:
        raise ValueError(f"n_selected must lie in [1, {n_total}], got {n_selected}")
    return alpha * error_rate + beta * (n_selected / n_total)


def evaluate(mask: np.ndarray, ds: Dataset, plan: FoldPlan, cfg: MelConfig) -> EvalOutcome:
    acc = cv_accuracy(ds, mask, plan, cfg.k_nn)
    n_sel = int(np.count_nonzero(mask))
    return EvalOutcome(acc, n_sel, fitness(1.0 - acc, n_sel, ds.n_features, cfg.alpha, cfg.beta))


class _Evaluator:
    """Fans mask evaluations out to threads; results come back in input order."""

    def __init__(self, ds: Dataset, plan: FoldPlan, cfg: MelConfig, threads: int):
        self.ds, self.plan, self.cfg = ds, plan, cfg
        self.count = 0
        self._pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def __call__(self, masks: Sequence[np.ndarray]) -> list[EvalOutcome]:
        self.count += len(masks)
        if self._pool is None:
            return [evaluate(m, self.ds, self.plan, self.cfg) for m in masks]
        return list(self._pool.map(lambda m: evaluate(m, self.ds, self.plan, self.cfg), masks))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()


def _swarm_rng(seed: int) -> np.random.Generator:
    # kept apart from the fold-plan stream, which uses ``seed`` directly
    return np.random.default_rng([seed, 1])


def _trace_point(records: BestRecords) -> TracePoint:
    g = records.glob
    return TracePoint(g.fitness, g.accuracy, g.subset_size)


def _finish(algorithm: str, cfg: MelConfig, records: BestRecords, trace, t0: float, n_evals: int,
            weight_trace=()) -> RunReport:
    g = records.glob
    return RunReport(
        algorithm=algorithm,
        seed=cfg.seed,
        best_mask=g.mask.copy(),
        best_accuracy=g.accuracy,
        best_fitness=g.fitness,
        trace=list(trace),
        wall_time=time.perf_counter() - t0,
        n_evaluations=n_evals,
        weight_trace=list(weight_trace),
    )


def run_mel(
    ds: Dataset,
    cfg: MelConfig,
    threads: int = 1,
    weight_trace_k: int = 0,
    on_generation: Optional[Callable[[int, list[Particle], FeatureWeights], None]] = None,
) -> RunReport:
    """Run the two-subpopulation search once with ``cfg.seed``.

    ``weight_trace_k > 0`` records the top weights after every generation.
    ``on_generation(t, population, weights)`` is an observation hook called
    after generation ``t`` (0 is the initial evaluation).
    """
    cfg.validate()
    t0 = time.perf_counter()
    plan = stratified_kfold(ds, cfg.cv_folds, cfg.seed)
    rng = _swarm_rng(cfg.seed)
    pso = cfg.pso
    pop = init_population(cfg.np, ds.n_features, pso, rng)
    weights = FeatureWeights(ds.n_features)
    half = cfg.np // 2
    sub1, sub2 = range(half), range(half, cfg.np)
    records = BestRecords.empty()
    evaluator = _Evaluator(ds, plan, cfg, threads)
    wtrace: list[tuple[int, int, float]] = []

    def record_weights(t: int) -> None:
        if weight_trace_k > 0:
            wtrace.extend((t, i, w) for i, w in top_k(weights, weight_trace_k))

    def absorb(idx: range, outcomes: list[EvalOutcome], subpop: int) -> None:
        for i, out in zip(idx, outcomes):
            p = pop[i]
            update_weights(weights, MaskDelta.between(p.prev_mask, p.mask), p.prev_accuracy, out.accuracy)
            p.prev_mask, p.prev_accuracy = p.mask, out.accuracy
            update_bests(records, p, out, subpop)

    try:
        for p in pop:
            p.mask = repair_mask(p.mask, p.position)
        outcomes = evaluator([p.mask for p in pop])
        for i, (p, out) in enumerate(zip(pop, outcomes)):
            p.prev_mask, p.prev_accuracy = p.mask, out.accuracy
            update_bests(records, p, out, 0 if i < half else 1)
        trace = [_trace_point(records)]
        record_weights(0)
        if on_generation:
            on_generation(0, pop, weights)

        for t in range(1, cfg.iterations + 1):
            gbest = records.glob.position.copy()
            sbest = records.sub[1].position.copy()
            for i in sub1:
                p = mel_step(pop[i], pop[i].pbest_position, gbest, sbest, pso, rng)
                p.mask = repair_mask(binarize(p.position, pso.theta), p.position)
                pop[i] = p
            absorb(sub1, evaluator([pop[i].mask for i in sub1]), 0)

            for i in sub2:
                mask = roulette_sample(weights, rng, cfg.subset_policy, cfg.bernoulli_scale)
                pop[i].mask = mask
                pop[i].position = mask_to_position(mask, pso.lb, pso.ub)
            absorb(sub2, evaluator([pop[i].mask for i in sub2]), 1)

            trace.append(_trace_point(records))
            record_weights(t)
            if on_generation:
                on_generation(t, pop, weights)
    finally:
        evaluator.close()
    return _finish("mel", cfg, records, trace, t0, evaluator.count, wtrace)


def run_pso_baseline(ds: Dataset, cfg: MelConfig, threads: int = 1) -> RunReport:
    """Single-swarm PSO with the same evaluation, repair and bookkeeping."""
    cfg.validate()
    t0 = time.perf_counter()
    plan = stratified_kfold(ds, cfg.cv_folds, cfg.seed)
    rng = _swarm_rng(cfg.seed)
    pso = cfg.pso
    pop = init_population(cfg.np, ds.n_features, pso, rng)
    records = BestRecords.empty()
    evaluator = _Evaluator(ds, plan, cfg, threads)
    try:
        for p in pop:
            p.mask = repair_mask(p.mask, p.position)
        for p, out in zip(pop, evaluator([p.mask for p in pop])):
            update_bests(records, p, out, 0)
        trace = [_trace_point(records)]
        for _ in range(cfg.iterations):
            gbest = records.glob.position.copy()
            for i, p in enumerate(pop):
                p = pso_step(p, p.pbest_position, gbest, pso, rng)
                p.mask = repair_mask(binarize(p.position, pso.theta), p.position)
                pop[i] = p
            for p, out in zip(pop, evaluator([p.mask for p in pop])):
                update_bests(records, p, out, 0)
            trace.append(_trace_point(records))
    finally:
        evaluator.close()
    return _finish("pso", cfg, records, trace, t0, evaluator.count)


ALGORITHMS = {"mel": run_mel, "pso": run_pso_baseline}
