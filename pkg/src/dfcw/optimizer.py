"""Search over sets of hop permutations.

Candidate sets are encoded as real vectors of random keys (one block of N
keys per waveform; ascending ranks within a block give the permutation), so
the swarm updates operate on plain real vectors. Three searchers share the
same decoding and cost: the accelerated swarm (single acceleration state
that doubles as momentum), a standard inertia-weight velocity swarm, and a
permutation-native GA. An exhaustive enumerator provides ground truth on
tiny instances.

Cost evaluations are memoized on the decoded permutations - a pure-function
cache that never changes results but makes collapsed populations cheap. The
`evaluations` counters report requested candidate evaluations (one per
particle/individual per iteration), cache hits included.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import Aggregation, CorrelationReport, cost_function
from .waveform import CodingSequence, WaveformParams, synthesize

__all__ = [
    "Particle",
    "SwarmConfig",
    "OptimizationResult",
    "decode_position",
    "encode_sequences",
    "acc_pso_step",
    "run_acc_pso",
    "run_baseline_pso",
    "run_baseline_ga",
    "exhaustive_search",
    "write_trace_csv",
]

# Baseline velocity-swarm constants (inertia weight + both pulls).
BASELINE_INERTIA = 0.72
BASELINE_PULL = 1.49

# Global-best improvements smaller than this do not reset the stagnation
# counter.
IMPROVEMENT_EPS = 1e-6

EXHAUSTIVE_GUARD = 1_000_000


@dataclass
class Particle:
    """One swarm member: current position, its acceleration state, and the
    best position/cost it has visited."""

    position: np.ndarray
    acceleration: np.ndarray
    personal_best_position: np.ndarray
    personal_best_cost: float


@dataclass(frozen=True)
class SwarmConfig:
    swarm_size: int = 40
    max_iterations: int = 1000
    K: float = 0.729
    c1: float = 1.494
    c2: float = 1.494
    lam: float = 0.1
    aggregation: Aggregation = Aggregation.MIN
    rng_seed: int = 0
    stagnation_window: int = 100
    position_bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if not 0 < self.K <= 1:
            raise ValueError("K must be in (0, 1]")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("c1 and c2 must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        lo, hi = self.position_bounds
        if not lo < hi:
            raise ValueError("position_bounds must be an increasing interval")


@dataclass
class OptimizationResult:
    best_sequences: list[CodingSequence]
    best_cost: float
    best_report: CorrelationReport
    cost_trace: np.ndarray
    mean_cost_trace: np.ndarray
    evaluations: int
    wall_time: float


def decode_position(
    position: np.ndarray, n_subpulses: int, n_waveforms: int
) -> list[CodingSequence]:
    """Random-keys decode: each consecutive block of N reals maps to the
    permutation of its ascending ranks, ties broken by lower index."""
    position = np.asarray(position, dtype=np.float64)
    if position.shape != (n_subpulses * n_waveforms,):
        raise ValueError(
            f"position length {position.size} != {n_waveforms} x {n_subpulses}"
        )
    seqs = []
    for block in position.reshape(n_waveforms, n_subpulses):
        order = np.argsort(block, kind="stable")
        ranks = np.empty(n_subpulses, dtype=np.int64)
        ranks[order] = np.arange(n_subpulses)
        seqs.append(CodingSequence(ranks))
    return seqs


def encode_sequences(seqs: list[CodingSequence], n_subpulses: int) -> np.ndarray:
    """Inverse of decode_position up to rank equivalence: keys in (0, 1)
    whose ranks reproduce the given permutations."""
    blocks = [(s.codes.astype(np.float64) + 0.5) / n_subpulses for s in seqs]
    return np.concatenate(blocks)


def acc_pso_step(
    swarm: list[Particle],
    global_best_position: np.ndarray,
    config: SwarmConfig,
    rng: np.random.Generator,
) -> list[Particle]:
    """One accelerated update of every particle.

    Per particle the acceleration becomes K*(A + c1*d*(g-x) + c2*w*(p-x))
    with d, w fresh elementwise uniforms in [0,1], and the position moves by
    the new acceleration, clamped to the bounds. Draws are consumed
    particle-major (both vectors of particle i before particle i+1) so runs
    replay exactly from the seed.
    """
    dim = global_best_position.size
    for part in swarm:
        if part.position.size != dim:
            raise ValueError("particle dimension does not match global best")
    lo, hi = config.position_bounds
    draws = rng.random((len(swarm), 2, dim))
    updated = []
    for i, part in enumerate(swarm):
        accel = config.K * (
            part.acceleration
            + config.c1 * draws[i, 0] * (global_best_position - part.position)
            + config.c2 * draws[i, 1] * (part.personal_best_position - part.position)
        )
        position = np.clip(part.position + accel, lo, hi)
        updated.append(
            Particle(
                position=position,
                acceleration=accel,
                personal_best_position=part.personal_best_position,
                personal_best_cost=part.personal_best_cost,
            )
        )
    return updated


class _CostEvaluator:
    """Synthesize-and-score with memoization on the decoded permutations."""

    def __init__(self, params: WaveformParams, lam: float, aggregation: Aggregation):
        self.params = params
        self.lam = lam
        self.aggregation = aggregation
        self.cache: dict[tuple[bytes, ...], float] = {}
        self.evaluations = 0

    def cost_of(self, seqs: list[CodingSequence]) -> float:
        self.evaluations += 1
        key = tuple(s.key() for s in seqs)
        cost = self.cache.get(key)
        if cost is None:
            cost = cost_function(
                self._synthesize_set(seqs), self.lam, self.aggregation
            )[0]
            self.cache[key] = cost
        return cost

    def report_of(self, seqs: list[CodingSequence]) -> tuple[float, CorrelationReport]:
        return cost_function(self._synthesize_set(seqs), self.lam, self.aggregation)

    def _synthesize_set(self, seqs):
        # Duplicate blocks within one candidate synthesize once.
        unique = {}
        for s in seqs:
            if s.key() not in unique:
                unique[s.key()] = synthesize(s, self.params)
        return [unique[s.key()] for s in seqs]


class _TraceKeeper:
    """Global-best bookkeeping plus the stagnation stop rule."""

    def __init__(self, stagnation_window: int):
        self.window = stagnation_window
        self.best_cost = math.inf
        self.best_seqs: list[CodingSequence] | None = None
        self.trace: list[float] = []
        self.mean_trace: list[float] = []
        self.last_improvement = 0

    def record(self, costs: list[float], seqs_of: list[list[CodingSequence]]) -> None:
        i = int(np.argmin(costs))
        if costs[i] < self.best_cost:
            if self.best_cost - costs[i] > IMPROVEMENT_EPS:
                self.last_improvement = len(self.trace)
            self.best_cost = costs[i]
            self.best_seqs = seqs_of[i]
        self.trace.append(self.best_cost)
        self.mean_trace.append(float(np.mean(costs)))

    def stagnated(self) -> bool:
        return len(self.trace) - 1 - self.last_improvement >= self.window


def _finish(
    keeper: _TraceKeeper, evaluator: _CostEvaluator, started: float
) -> OptimizationResult:
    cost, report = evaluator.report_of(keeper.best_seqs)
    return OptimizationResult(
        best_sequences=keeper.best_seqs,
        best_cost=keeper.best_cost,
        best_report=report,
        cost_trace=np.array(keeper.trace),
        mean_cost_trace=np.array(keeper.mean_trace),
        evaluations=evaluator.evaluations,
        wall_time=time.perf_counter() - started,
    )


def _init_positions(
    params: WaveformParams,
    config: SwarmConfig,
    rng: np.random.Generator,
    warm_start: list[CodingSequence] | None,
) -> np.ndarray:
    lo, hi = config.position_bounds
    dim = params.n_subpulses * params.n_waveforms
    positions = rng.uniform(lo, hi, size=(config.swarm_size, dim))
    if warm_start is not None:
        if len(warm_start) != params.n_waveforms or any(
            len(s) != params.n_subpulses for s in warm_start
        ):
            raise ValueError("warm start shape does not match params")
        positions[0] = encode_sequences(warm_start, params.n_subpulses)
    return positions


def run_acc_pso(
    params: WaveformParams,
    config: SwarmConfig,
    warm_start: list[CodingSequence] | None = None,
) -> OptimizationResult:
    """Accelerated swarm search over permutation sets.

    Particles start uniform in the bounds with zero acceleration (particle 0
    optionally seeded from `warm_start`); every iteration decodes and scores
    the whole swarm, updates personal/global bests, then applies
    acc_pso_step. Stops at max_iterations or once the global best has not
    improved by more than 1e-6 for stagnation_window iterations.
    """
    started = time.perf_counter()
    rng = np.random.default_rng(config.rng_seed)
    evaluator = _CostEvaluator(params, config.lam, config.aggregation)
    keeper = _TraceKeeper(config.stagnation_window)

    positions = _init_positions(params, config, rng, warm_start)
    swarm = [
        Particle(
            position=positions[i],
            acceleration=np.zeros(positions.shape[1]),
            personal_best_position=positions[i].copy(),
            personal_best_cost=math.inf,
        )
        for i in range(config.swarm_size)
    ]

    for iteration in range(config.max_iterations):
        decoded = [
            decode_position(p.position, params.n_subpulses, params.n_waveforms)
            for p in swarm
        ]
        costs = [evaluator.cost_of(seqs) for seqs in decoded]
        for part, cost in zip(swarm, costs):
            if cost < part.personal_best_cost:
                part.personal_best_cost = cost
                part.personal_best_position = part.position.copy()
        keeper.record(costs, decoded)
        if keeper.stagnated() or iteration == config.max_iterations - 1:
            break
        best_particle = min(swarm, key=lambda p: p.personal_best_cost)
        swarm = acc_pso_step(swarm, best_particle.personal_best_position, config, rng)

    return _finish(keeper, evaluator, started)


def run_baseline_pso(
    params: WaveformParams,
    config: SwarmConfig,
    warm_start: list[CodingSequence] | None = None,
) -> OptimizationResult:
    """Standard inertia-weight velocity swarm (w=0.72, both pulls 1.49) on
    the same encoding, cost, trace, and stopping contracts as run_acc_pso."""
    started = time.perf_counter()
    rng = np.random.default_rng(config.rng_seed)
    evaluator = _CostEvaluator(params, config.lam, config.aggregation)
    keeper = _TraceKeeper(config.stagnation_window)
    lo, hi = config.position_bounds

    positions = _init_positions(params, config, rng, warm_start)
    velocities = np.zeros_like(positions)
    pbest_pos = positions.copy()
    pbest_cost = np.full(config.swarm_size, math.inf)

    for iteration in range(config.max_iterations):
        decoded = [
            decode_position(pos, params.n_subpulses, params.n_waveforms)
            for pos in positions
        ]
        costs = [evaluator.cost_of(seqs) for seqs in decoded]
        for i, cost in enumerate(costs):
            if cost < pbest_cost[i]:
                pbest_cost[i] = cost
                pbest_pos[i] = positions[i].copy()
        keeper.record(costs, decoded)
        if keeper.stagnated() or iteration == config.max_iterations - 1:
            break
        g = pbest_pos[int(np.argmin(pbest_cost))]
        draws = rng.random((config.swarm_size, 2, positions.shape[1]))
        velocities = (
            BASELINE_INERTIA * velocities
            + BASELINE_PULL * draws[:, 0] * (pbest_pos - positions)
            + BASELINE_PULL * draws[:, 1] * (g[None, :] - positions)
        )
        positions = np.clip(positions + velocities, lo, hi)

    return _finish(keeper, evaluator, started)


def _order_crossover(
    p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """OX: keep a random slice of p1, fill the rest in p2's order."""
    n = p1.size
    if n == 1:
        return p1.copy()
    a, b = sorted(rng.integers(0, n, size=2))
    child = np.full(n, -1, dtype=np.int64)
    child[a : b + 1] = p1[a : b + 1]
    taken = set(child[a : b + 1].tolist())
    fill = [g for g in p2 if g not in taken]
    slots = [i for i in range(n) if not a <= i <= b]
    child[slots] = fill
    return child


def _swap_mutate(perm: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Each gene swaps with a random partner with probability 2/N."""
    n = perm.size
    out = perm.copy()
    rate = min(1.0, 2.0 / n)
    probs = rng.random(n)
    for i in range(n):
        if probs[i] < rate:
            j = int(rng.integers(0, n))
            out[i], out[j] = out[j], out[i]
    return out


def run_baseline_ga(
    params: WaveformParams,
    config: SwarmConfig,
    warm_start: list[CodingSequence] | None = None,
) -> OptimizationResult:
    """Permutation-native GA baseline: tournament selection of size 3, order
    crossover per waveform block, swap mutation at rate 2/N, one elite.
    Population size and generation count come from swarm_size and
    max_iterations, so budgets match the swarm runs."""
    started = time.perf_counter()
    rng = np.random.default_rng(config.rng_seed)
    evaluator = _CostEvaluator(params, config.lam, config.aggregation)
    keeper = _TraceKeeper(config.stagnation_window)
    n, n_wave, pop_size = params.n_subpulses, params.n_waveforms, config.swarm_size

    population = [
        [CodingSequence(rng.permutation(n)) for _ in range(n_wave)]
        for _ in range(pop_size)
    ]
    if warm_start is not None:
        if len(warm_start) != n_wave or any(len(s) != n for s in warm_start):
            raise ValueError("warm start shape does not match params")
        population[0] = list(warm_start)

    for generation in range(config.max_iterations):
        costs = [evaluator.cost_of(ind) for ind in population]
        keeper.record(costs, population)
        if keeper.stagnated() or generation == config.max_iterations - 1:
            break
        elite = population[int(np.argmin(costs))]
        offspring = [elite]
        while len(offspring) < pop_size:
            contenders = rng.integers(0, pop_size, size=3)
            p1 = population[min(contenders, key=lambda i: costs[i])]
            contenders = rng.integers(0, pop_size, size=3)
            p2 = population[min(contenders, key=lambda i: costs[i])]
            child = [
                CodingSequence(
                    _swap_mutate(
                        _order_crossover(p1[l].codes, p2[l].codes, rng), rng
                    )
                )
                for l in range(n_wave)
            ]
            offspring.append(child)
        population = offspring

    return _finish(keeper, evaluator, started)


def exhaustive_search(
    params: WaveformParams,
    lam: float = 0.1,
    aggregation: Aggregation = Aggregation.MIN,
) -> OptimizationResult:
    """Ground truth by enumerating every ordered tuple of distinct
    permutations; guarded to at most 10^6 cost evaluations."""
    started = time.perf_counter()
    n, n_wave = params.n_subpulses, params.n_waveforms
    n_perms = math.factorial(n)
    total = math.perm(n_perms, n_wave)
    if total > EXHAUSTIVE_GUARD:
        raise ValueError(
            f"instance too large for exhaustive search: {total} > {EXHAUSTIVE_GUARD}"
        )
    evaluator = _CostEvaluator(params, lam, aggregation)
    sequences = [
        CodingSequence(np.array(p, dtype=np.int64))
        for p in itertools.permutations(range(n))
    ]
    best_cost = math.inf
    best: list[CodingSequence] | None = None
    count = 0
    for combo in itertools.permutations(sequences, n_wave):
        count += 1
        cost = evaluator.cost_of(list(combo))
        if cost < best_cost:
            best_cost = cost
            best = list(combo)
    cost, report = evaluator.report_of(best)
    return OptimizationResult(
        best_sequences=best,
        best_cost=best_cost,
        best_report=report,
        cost_trace=np.array([best_cost]),
        mean_cost_trace=np.array([best_cost]),
        evaluations=count,
        wall_time=time.perf_counter() - started,
    )


def write_trace_csv(
    path: str | Path, result: OptimizationResult, evals_per_iteration: int
) -> None:
    """Per-iteration records: iteration,best_cost,mean_cost,evaluations."""
    lines = ["iteration,best_cost,mean_cost,evaluations"]
    for i, (best, mean) in enumerate(
        zip(result.cost_trace, result.mean_cost_trace), start=1
    ):
        lines.append(
            f"{i},{float(best)!r},{float(mean)!r},{i * evals_per_iteration}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
