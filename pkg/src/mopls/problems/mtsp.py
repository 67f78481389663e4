"""Symmetric multiobjective TSP on Euclidean planes (one plane per objective)."""

from __future__ import annotations

import numpy as np

from mopls.problems.base import (
    COORD_RANGE,
    DEFAULT_CANDIDATES,
    InvalidMoveError,
    InvalidSolutionError,
    PlanarCosts,
    apply_two_edge,
    build_candidate_lists,
    sample_from,
    two_edge_cost_delta,
    two_edge_moves,
)
from mopls.problems.moves import TWO_EDGE, Move, MoveSet, TwoEdgeExchange


class MTSPInstance:
    """MTSP instance; a solution (tour) is a permutation array of node ids.

    Objectives are tour lengths, one per plane, reported negated so that
    larger is better.
    """

    kind = "MTSP"

    def __init__(self, coords: np.ndarray, candidates: int = DEFAULT_CANDIDATES, cache: bool | None = None, name: str = ""):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 3 or coords.shape[2] != 2:
            raise ValueError("coords must have shape (d, n, 2)")
        self.costs = PlanarCosts(coords, cache)
        self.d, self.n = coords.shape[0], coords.shape[1]
        self.k = candidates
        self.cand = build_candidate_lists(self.costs.coords, candidates)
        self.name = name

    @property
    def coords(self) -> np.ndarray:
        return self.costs.coords

    @property
    def senses(self) -> tuple[str, ...]:
        return ("min",) * self.d

    def candidate_lists(self) -> list[np.ndarray]:
        return [np.flatnonzero(row) for row in self.cand]

    def with_candidates(self, k: int) -> MTSPInstance:
        return MTSPInstance(self.coords, k, self.costs.cached, self.name)

    def objective_scales(self) -> np.ndarray:
        """Rough per-objective magnitude (expected length of a random tour)."""
        return self.n * self.costs.mean_edge()

    def utopia(self) -> np.ndarray:
        """Canonical point no tour can beat (zero length everywhere)."""
        return np.zeros(self.d)

    def validate(self, tour: np.ndarray) -> None:
        if len(tour) != self.n or not np.array_equal(np.sort(tour), np.arange(self.n)):
            raise InvalidSolutionError("tour is not a permutation of the instance nodes")

    def evaluate(self, tour: np.ndarray) -> np.ndarray:
        self.validate(tour)
        return -self.costs.cycle_cost(np.asarray(tour))

    def random_solution(self, rng: np.random.Generator) -> np.ndarray:
        return rng.permutation(self.n)

    def neighborhood(self, tour: np.ndarray) -> MoveSet:
        return two_edge_moves(tour, self.cand)

    def move_groups(self, tour: np.ndarray) -> list[MoveSet]:
        return [self.neighborhood(tour)]

    def sample_moves(self, tour: np.ndarray, rng: np.random.Generator, count: int) -> MoveSet:
        return sample_from(self.move_groups(tour), rng, count)

    def deltas(self, tour: np.ndarray, moves: MoveSet) -> np.ndarray:
        """Objective changes for every move, shape ``(len(moves), d)``."""
        if len(moves) and np.any(moves.kind != TWO_EDGE):
            raise InvalidMoveError("MTSP supports two-edge exchanges only")
        return -two_edge_cost_delta(self.costs, tour, moves.a, moves.b).T

    def apply(self, tour: np.ndarray, move: Move) -> np.ndarray:
        if not isinstance(move, TwoEdgeExchange):
            raise InvalidMoveError(f"MTSP supports two-edge exchanges only, got {move!r}")
        return apply_two_edge(tour, move.i, move.j)

    def apply_move_delta(self, tour: np.ndarray, move: Move) -> tuple[np.ndarray, np.ndarray]:
        new = self.apply(tour, move)
        return new, self.deltas(tour, MoveSet.from_moves([move]))[0]

    def to_raw(self, y: np.ndarray) -> np.ndarray:
        return -np.asarray(y)

    def __eq__(self, other) -> bool:
        return isinstance(other, MTSPInstance) and self.k == other.k and np.array_equal(self.coords, other.coords)

    def __repr__(self) -> str:
        return f"MTSPInstance(n={self.n}, d={self.d}, k={self.k})"


def generate_mtsp(n: int, d: int, seed: int, candidates: int = DEFAULT_CANDIDATES, cache: bool | None = None) -> MTSPInstance:
    """Random Euclidean MTSP: ``d`` planes of ``n`` points uniform in [0, 1000]^2."""
    if n < 5 or d < 2:
        raise ValueError("need n >= 5 and d >= 2")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, COORD_RANGE, size=(d, n, 2))
    return MTSPInstance(coords, candidates, cache, name=f"mtsp-n{n}-d{d}-s{seed}")
