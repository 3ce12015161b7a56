"""Particle state, PSO kinematics and best-so-far bookkeeping.

Positions live in ``[lb, ub]`` and are thresholded at ``theta`` to obtain
feature masks. Random coefficients are drawn fresh per coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class PsoParams:
    omega: float = 0.9
    c1: float = 2.0
    c2: float = 2.0
    c3: float = 2.0
    lb: float = 0.0
    ub: float = 1.0
    v_max: float = 0.5
    theta: float = 0.6

    def __post_init__(self) -> None:
        if not self.lb < self.ub:
            raise ValueError(f"lb ({self.lb}) must be below ub ({self.ub})")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if not self.lb < self.theta < self.ub:
            raise ValueError(f"theta ({self.theta}) must lie strictly inside ({self.lb}, {self.ub})")
        for name in ("omega", "c1", "c2", "c3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    mask: Optional[np.ndarray] = None
    prev_mask: Optional[np.ndarray] = None
    prev_accuracy: Optional[float] = None
    pbest_position: Optional[np.ndarray] = None
    pbest_fitness: float = np.inf

    def copy(self) -> "Particle":
        def c(a):
            return None if a is None else a.copy()

        return Particle(
            c(self.position), c(self.velocity), c(self.mask), c(self.prev_mask),
            self.prev_accuracy, c(self.pbest_position), self.pbest_fitness,
        )


def binarize(position: np.ndarray, theta: float) -> np.ndarray:
    """Feature ``n`` is selected iff ``position[n] > theta``."""
    return np.asarray(position) > theta


def mask_to_position(mask: np.ndarray, low: float, high: float) -> np.ndarray:
    """A position that binarizes back to ``mask`` for any theta in [low, high)."""
    return np.where(np.asarray(mask, dtype=bool), high, low).astype(np.float64)


def repair_mask(mask: np.ndarray, position: np.ndarray) -> np.ndarray:
    """Select the largest coordinate when the mask came out empty."""
    if mask.any():
        return mask
    fixed = np.zeros_like(mask, dtype=bool)
    fixed[int(np.argmax(position))] = True
    return fixed


def init_population(np_: int, dims: int, params: PsoParams, seed) -> list[Particle]:
    """Uniform random positions in ``[lb, ub]`` and velocities in ``[-v_max, v_max]``.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    if np_ < 2 or np_ % 2:
        raise ValueError(f"population size must be even and >= 2 (two equal halves), got {np_}")
    if dims < 1:
        raise ValueError("dims must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pos = rng.uniform(params.lb, params.ub, size=(np_, dims))
    vel = rng.uniform(-params.v_max, params.v_max, size=(np_, dims))
    return [
        Particle(position=pos[i].copy(), velocity=vel[i].copy(), mask=binarize(pos[i], params.theta))
        for i in range(np_)
    ]


def _move(p: Particle, v: np.ndarray, params: PsoParams) -> Particle:
    v = np.clip(v, -params.v_max, params.v_max)
    x = np.clip(p.position + v, params.lb, params.ub)
    return replace(p, position=x, velocity=v)


def pso_step(p: Particle, pbest, gbest, params: PsoParams, rng: np.random.Generator,
             r: Optional[tuple] = None) -> Particle:
    """Canonical velocity/position update with clamping.

    ``r`` pins ``(r1, r2)`` for testing; otherwise both are drawn from ``rng``.
    """
    x = p.position
    r1, r2 = r if r is not None else (rng.random(x.shape), rng.random(x.shape))
    v = params.omega * p.velocity + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (gbest - x)
    return _move(p, v, params)


def mel_step(p: Particle, pbest, gbest, sbest, params: PsoParams, rng: np.random.Generator,
             r: Optional[tuple] = None) -> Particle:
    """PSO update plus a pull towards the other subpopulation's best ``sbest``.

    ``r3`` is only drawn when ``c3 > 0``, so with ``c3 == 0`` the random
    stream (and therefore the whole trajectory) matches :func:`pso_step`.
    """
    x = p.position
    if r is not None:
        r1, r2, r3 = r
    else:
        r1, r2 = rng.random(x.shape), rng.random(x.shape)
        r3 = rng.random(x.shape) if params.c3 > 0 else None
    v = params.omega * p.velocity + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (gbest - x)
    if params.c3 > 0:
        v = v + params.c3 * r3 * (sbest - x)
    return _move(p, v, params)


@dataclass
class BestRecord:
    position: Optional[np.ndarray] = None
    mask: Optional[np.ndarray] = None
    fitness: float = np.inf
    accuracy: float = 0.0

    def offer(self, position, mask, fitness: float, accuracy: float) -> bool:
        """Replace the incumbent iff ``fitness`` is strictly lower."""
        if fitness < self.fitness:
            self.position = np.array(position, copy=True)
            self.mask = np.array(mask, copy=True)
            self.fitness = float(fitness)
            self.accuracy = float(accuracy)
            return True
        return False

    @property
    def subset_size(self) -> int:
        return 0 if self.mask is None else int(np.count_nonzero(self.mask))


@dataclass
class BestRecords:
    """Best-so-far per subpopulation and for the whole population."""

    sub: tuple[BestRecord, BestRecord]
    glob: BestRecord

    @classmethod
    def empty(cls) -> "BestRecords":
        return cls((BestRecord(), BestRecord()), BestRecord())


def update_bests(records: BestRecords, particle: Particle, outcome, subpop: int) -> BestRecords:
    """Fold one fresh evaluation into personal, subpopulation and global bests.

    ``particle.pbest_*`` is updated in place; the records are mutated and
    returned for convenience. Only strictly better fitness replaces.
    """
    pos = particle.position
    if outcome.fitness < particle.pbest_fitness:
        particle.pbest_fitness = outcome.fitness
        particle.pbest_position = pos.copy()
    records.sub[subpop].offer(pos, particle.mask, outcome.fitness, outcome.accuracy)
    records.glob.offer(pos, particle.mask, outcome.fitness, outcome.accuracy)
    return records
