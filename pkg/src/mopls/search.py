"""Pareto local search, many-objective PLS and the scalarized seeding phase."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Union

import numpy as np

from mopls.archive import ParetoArchive, make_archive
from mopls.domain import (
    ChebycheffFunction,
    draw_weight_vector,
    normalize_weights,
    reference_point_from_extremes,
    safe_ranges,
)
from mopls.problems.mtspwp import MTSPWPInstance

# -- policies and configuration ------------------------------------------


@dataclass(frozen=True)
class FixedRandomMoves:
    """Test ``m`` random neighbors (drawn with replacement by default)."""

    m: int = 100
    replacement: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")


@dataclass(frozen=True)
class FullNeighborhood:
    pass


@dataclass(frozen=True)
class FirstNonDominated:
    """Scan a shuffled neighborhood, stop at the first neighbor the current solution does not weakly dominate."""


@dataclass(frozen=True)
class FirstDominating:
    """Scan a shuffled neighborhood, stop at the first neighbor dominating the current solution."""


ExplorationPolicy = Union[FixedRandomMoves, FullNeighborhood, FirstNonDominated, FirstDominating]


class Selection(enum.Enum):
    CHEBYCHEFF_DRAW = "chebycheff"
    UNIFORM_RANDOM = "uniform"


@dataclass(frozen=True)
class Budget:
    """Search budget: wall-clock seconds (``"time"``) or neighbor evaluations (``"evals"``)."""

    mode: str
    limit: float

    def __post_init__(self):
        if self.mode not in ("time", "evals"):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if self.limit < 0:
            raise ValueError("budget must be non-negative")

    @classmethod
    def seconds(cls, s: float) -> Budget:
        return cls("time", float(s))

    @classmethod
    def evaluations(cls, n: int) -> Budget:
        return cls("evals", int(n))


@dataclass(frozen=True)
class SearchConfig:
    budget: Budget
    exploration: ExplorationPolicy = FixedRandomMoves(100)
    selection: Selection = Selection.CHEBYCHEFF_DRAW
    archive_backend: str = "nd-tree"
    rng_seed: int = 0
    checkpoint_fraction: float = 0.1

    def __post_init__(self):
        if not 0 < self.checkpoint_fraction <= 1:
            raise ValueError("checkpoint_fraction must lie in (0, 1]")


# -- scalarizing functions used by the seeding phase ---------------------


@dataclass(frozen=True)
class WeightedSum:
    """``-sum_k w_k y_k``; minimized."""

    weights: np.ndarray

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        return -(np.asarray(Y) @ self.weights)


@dataclass(frozen=True)
class CombinedChebycheffLinear:
    """Chebycheff term plus a down-weighted linear term, both measured from ``reference``."""

    weights: np.ndarray
    reference: np.ndarray
    chebycheff_weight: float = 1.0
    linear_weight: float = 0.5

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        gap = self.weights * (self.reference - np.asarray(Y))
        return self.chebycheff_weight * gap.max(axis=-1) + self.linear_weight * gap.sum(axis=-1)


ScalarizingSpec = Union[WeightedSum, CombinedChebycheffLinear]


# -- checkpoints ---------------------------------------------------------


@dataclass
class Checkpoint:
    elapsed: float
    evaluations: int
    objectives: np.ndarray

    @property
    def archive_size(self) -> int:
        return len(self.objectives)


@dataclass
class SearchResult:
    archive: ParetoArchive
    checkpoints: list[Checkpoint]
    evaluations: int = 0
    iterations: int = 0
    elapsed: float = 0.0
    converged: bool = False


class Tracker:
    """Budget accounting plus archive snapshots at every checkpoint fraction.

    Checkpoint 0 is the archive handed to the search; checkpoint ``i`` is taken
    once ``i * fraction`` of the budget is used.  In evaluation mode the work is
    cut exactly at checkpoint boundaries so snapshots are reproducible.  Time
    mode stamps each checkpoint with its nominal time, evaluation mode with
    the measured wall time.
    """

    def __init__(self, budget: Budget, fraction: float, archive: ParetoArchive):
        self.budget = budget
        self.archive = archive
        k = max(1, round(1 / fraction))
        if budget.mode == "evals":
            self.thresholds = [round(budget.limit * i / k) for i in range(1, k + 1)]
        else:
            self.thresholds = [budget.limit * i / k for i in range(1, k + 1)]
        self.used = 0
        self.next = 0
        self.t0 = time.perf_counter()
        self.checkpoints = [Checkpoint(0.0, 0, archive.objectives())]
        self.poll()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def room(self, want: int) -> int:
        if self.next >= len(self.thresholds):
            return 0
        if self.budget.mode == "evals":
            return max(0, min(want, self.thresholds[self.next] - self.used))
        return want

    def spend(self, k: int) -> None:
        self.used += k
        self.poll()

    def poll(self) -> None:
        th = self.thresholds
        if self.budget.mode == "evals":
            while self.next < len(th) and self.used >= th[self.next]:
                self._snap(self.elapsed(), self.used)
        else:
            el = self.elapsed()
            while self.next < len(th) and el >= th[self.next]:
                self._snap(th[self.next], self.used)

    @property
    def done(self) -> bool:
        return self.next >= len(self.thresholds)

    def _snap(self, elapsed: float, evaluations: int) -> None:
        self.checkpoints.append(Checkpoint(float(elapsed), int(evaluations), self.archive.objectives()))
        self.next += 1

    def finish(self) -> list[Checkpoint]:
        """Fill checkpoints the search never reached (early stop) with the final archive."""
        while self.next < len(self.thresholds):
            t = self.thresholds[self.next]
            if self.budget.mode == "evals":
                self._snap(self.elapsed(), t)
            else:
                self._snap(t, self.used)
        return self.checkpoints


def run_record_checkpoint(checkpoints: list[Checkpoint], elapsed: float, archive: ParetoArchive, evaluations: int = 0) -> list[Checkpoint]:
    """Append a snapshot of ``archive``; timestamps must not go backwards."""
    if checkpoints and elapsed < checkpoints[-1].elapsed:
        raise ValueError("checkpoint timestamps must be monotone")
    checkpoints.append(Checkpoint(float(elapsed), evaluations, archive.objectives()))
    return checkpoints


# -- neighborhood processing shared by PLS and MPLS ----------------------


def _offer_neighbors(inst, archive: ParetoArchive, x, yx: np.ndarray, moves, deltas: np.ndarray, tracker: Tracker, stop=None, accepted=None) -> bool:
    """Offer neighbors of ``x`` to ``archive`` in order, charging the budget.

    Neighbors weakly dominated by ``x`` are skipped.  Returns True when ``stop``
    fired (a qualifying neighbor was found).  Accepted solutions are appended
    to ``accepted`` when given.
    """
    cand = yx + deltas
    passes = (cand > yx).any(axis=1)
    total = len(moves)
    pos = 0
    chunk_cap = total if tracker.budget.mode == "evals" else 128
    while pos < total:
        k = tracker.room(min(chunk_cap, total - pos))
        if k == 0:
            return False
        for idx in np.flatnonzero(passes[pos : pos + k]) + pos:
            x_new = inst.apply(x, moves.move(idx))
            y_new = inst.evaluate(x_new)
            if not (y_new > yx).any():
                continue
            if archive.update(y_new, x_new) and accepted is not None:
                accepted.append((x_new, y_new))
            if stop is not None and stop(y_new):
                tracker.spend(idx - pos + 1)
                return True
        tracker.spend(k)
        pos += k
    return False


def _neighborhood_deltas(inst, x, moves):
    return inst.deltas(x, moves)


# -- standard PLS ----------------------------------------------------------


def standard_pls(inst, archive: ParetoArchive, config: SearchConfig) -> SearchResult:
    """Explore complete neighborhoods of every newly accepted solution, round by round."""
    if not len(archive):
        raise ValueError("standard PLS needs a non-empty initial archive")
    tracker = Tracker(config.budget, config.checkpoint_fraction, archive)
    P = [(e.payload, np.array(e.y)) for e in archive.entries()]
    rounds = 0
    while P and not tracker.done:
        Pa: list = []
        for x, yx in P:
            moves = inst.neighborhood(x)
            deltas = inst.deltas(x, moves)
            _offer_neighbors(inst, archive, x, yx, moves, deltas, tracker, accepted=Pa)
            if tracker.done:
                break
        rounds += 1
        if tracker.done:
            break
        P = Pa
    converged = not P
    return SearchResult(archive, tracker.finish(), tracker.used, rounds, tracker.elapsed(), converged)


# -- MPLS ------------------------------------------------------------------


def selection_function(archive: ParetoArchive, rng: np.random.Generator) -> ChebycheffFunction:
    """Random range-normalized Chebycheff function anchored just beyond the archive maxima."""
    maxima, minima = archive.extremes()
    spread = maxima - minima
    ranges = safe_ranges(spread, maxima)
    reference = reference_point_from_extremes(maxima, spread)
    w = draw_weight_vector(archive.d, rng)
    return ChebycheffFunction(normalize_weights(w, ranges), reference)


def mpls(inst, archive: ParetoArchive, config: SearchConfig, on_select: Callable[[Any], None] | None = None) -> SearchResult:
    """Many-objective Pareto local search.

    Each iteration picks one archive member (Chebycheff draw or uniformly at
    random), explores its neighborhood per ``config.exploration`` and offers
    every neighbor it does not weakly dominate to the archive, until the
    budget runs out.
    """
    if not len(archive):
        raise ValueError("MPLS needs a non-empty initial archive")
    rng = np.random.default_rng(config.rng_seed)
    tracker = Tracker(config.budget, config.checkpoint_fraction, archive)
    policy = config.exploration
    iterations = 0
    while not tracker.done:
        if config.selection is Selection.CHEBYCHEFF_DRAW:
            entry, _ = archive.minimize_chebycheff(selection_function(archive, rng))
        else:
            entry = archive.random_entry(rng)
        if on_select is not None:
            on_select(entry)
        x, yx = entry.payload, np.array(entry.y)
        stop = None
        if isinstance(policy, FixedRandomMoves):
            if policy.replacement:
                moves = inst.sample_moves(x, rng, policy.m)
            else:
                full = inst.neighborhood(x)
                moves = full.take(rng.permutation(len(full))[: policy.m])
        else:
            moves = inst.neighborhood(x)
            if not isinstance(policy, FullNeighborhood):
                moves = moves.take(rng.permutation(len(moves)))
                if isinstance(policy, FirstNonDominated):
                    stop = _always
                else:
                    stop = _dominates_fn(yx)
        deltas = inst.deltas(x, moves)
        _offer_neighbors(inst, archive, x, yx, moves, deltas, tracker, stop=stop)
        iterations += 1
    return SearchResult(archive, tracker.finish(), tracker.used, iterations, tracker.elapsed())


def _always(_y) -> bool:
    return True


def _dominates_fn(yx: np.ndarray):
    def stop(y: np.ndarray) -> bool:
        return bool((y >= yx).all() and (y > yx).any())

    return stop


# -- seeding phase -----------------------------------------------------------


@dataclass
class LocalSearchResult:
    solution: Any
    objectives: np.ndarray
    value: float
    iterations: int
    evaluations: int


def steepest_local_search(inst, spec: ScalarizingSpec, start, rng: np.random.Generator | None = None) -> LocalSearchResult:
    """Apply the best improving neighborhood move until none improves ``spec``."""
    x = np.asarray(start)
    y = inst.evaluate(x)
    v = float(spec(y))
    iterations = evaluations = 0
    while True:
        moves = inst.neighborhood(x)
        if not len(moves):
            break
        vals = spec(y + inst.deltas(x, moves))
        evaluations += len(moves)
        k = int(np.argmin(vals))
        if not vals[k] < v - 1e-9 * max(1.0, abs(v)):
            break
        x = inst.apply(x, moves.move(k))
        y = inst.evaluate(x)
        v = float(spec(y))
        iterations += 1
    return LocalSearchResult(x, y, v, iterations, evaluations)


def default_family(inst) -> str:
    return "combined" if isinstance(inst, MTSPWPInstance) else "weighted-sum"


@dataclass
class SeedRun:
    weights: np.ndarray
    result: LocalSearchResult
    accepted: bool
    elapsed: float
    evaluations: int


@dataclass
class SeedResult:
    entries: list[tuple[np.ndarray, Any]]
    runs: list[SeedRun] = field(default_factory=list)
    elapsed: float = 0.0
    evaluations: int = 0

    def build_archive(self, backend: str = "nd-tree", d: int | None = None) -> ParetoArchive:
        """Fresh archive holding the seed entries, inserted in their original order."""
        d = d if d is not None else len(self.entries[0][0])
        archive = make_archive(backend, d)
        for y, payload in self.entries:
            archive.update(y, payload)
        return archive


def seed_runs(inst, num_weight_vectors: int, rng: np.random.Generator, family: str | None = None,
              backend: str = "nd-tree") -> Iterable[tuple[SeedRun, ParetoArchive]]:
    """Yield each seeding local search run together with the archive so far."""
    if num_weight_vectors < 1:
        raise ValueError("num_weight_vectors must be at least 1")
    family = family or default_family(inst)
    archive = make_archive(backend, inst.d)
    scales = inst.objective_scales()
    t0 = time.perf_counter()
    evaluations = 0
    for _ in range(num_weight_vectors):
        w = draw_weight_vector(inst.d, rng)
        start = inst.random_solution(rng)
        if family == "weighted-sum":
            spec = WeightedSum(w)
        elif family == "combined":
            if len(archive):
                maxima, minima = archive.extremes()
                ref = reference_point_from_extremes(maxima, maxima - minima)
            else:
                ref = inst.utopia()
            spec = CombinedChebycheffLinear(w / scales, ref)
        else:
            raise ValueError(f"unknown scalarizing family {family!r}")
        res = steepest_local_search(inst, spec, start, rng)
        evaluations += res.evaluations
        ok = archive.update(res.objectives, res.solution)
        yield SeedRun(w, res, ok, time.perf_counter() - t0, evaluations), archive


def seed_archive(inst, num_weight_vectors: int, rng: np.random.Generator, family: str | None = None,
                 backend: str = "nd-tree") -> SeedResult:
    """Phase one: scalarized local search from random starts, one run per weight vector."""
    runs = []
    archive = None
    for run, archive in seed_runs(inst, num_weight_vectors, rng, family, backend):
        runs.append(run)
    entries = [(np.array(e.y), e.payload) for e in archive.entries()]
    return SeedResult(entries, runs, runs[-1].elapsed, runs[-1].evaluations)
