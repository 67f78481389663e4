"""Multiobjective TSP with profits.

A solution (route) is an array holding a subset of nodes in visiting order.
The first ``d1`` objectives are closed-route costs (negated), the remaining
``d2`` are collected profits.  Routes always keep at least one node; a
single-node route costs nothing.
"""

from __future__ import annotations

import math

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
from mopls.problems.moves import (
    DELETE,
    EXCHANGE,
    INSERT,
    TWO_EDGE,
    Move,
    MoveSet,
    NodeDelete,
    NodeExchange,
    NodeInsert,
    TwoEdgeExchange,
)

PROFIT_RANGE = 2000.0


class MTSPWPInstance:
    kind = "MTSPWP"

    def __init__(self, coords: np.ndarray, profits: np.ndarray, candidates: int = DEFAULT_CANDIDATES, cache: bool | None = None, name: str = ""):
        coords = np.asarray(coords, dtype=float)
        profits = np.asarray(profits, dtype=float)
        if coords.ndim != 3 or coords.shape[2] != 2:
            raise ValueError("coords must have shape (d1, n, 2)")
        if profits.ndim != 2 or profits.shape[0] != coords.shape[1]:
            raise ValueError("profits must have shape (n, d2)")
        if np.any(profits < 0):
            raise ValueError("profits must be non-negative")
        self.costs = PlanarCosts(coords, cache)
        self.profits = np.ascontiguousarray(profits)
        self.d1 = coords.shape[0]
        self.n = coords.shape[1]
        self.d2 = profits.shape[1]
        self.d = self.d1 + self.d2
        self.k = candidates
        self.cand = build_candidate_lists(self.costs.coords, candidates)
        self.name = name

    @property
    def coords(self) -> np.ndarray:
        return self.costs.coords

    @property
    def senses(self) -> tuple[str, ...]:
        return ("min",) * self.d1 + ("max",) * self.d2

    def candidate_lists(self) -> list[np.ndarray]:
        return [np.flatnonzero(row) for row in self.cand]

    def with_candidates(self, k: int) -> MTSPWPInstance:
        return MTSPWPInstance(self.coords, self.profits, k, self.costs.cached, self.name)

    def objective_scales(self) -> np.ndarray:
        """Random-tour cost per cost plane, total available profit per profit."""
        return np.concatenate([self.n * self.costs.mean_edge(), self.profits.sum(axis=0)])

    def utopia(self) -> np.ndarray:
        """Canonical point no route can beat: zero cost, every profit collected."""
        return np.concatenate([np.zeros(self.d1), self.profits.sum(axis=0)])

    def validate(self, route: np.ndarray) -> None:
        route = np.asarray(route)
        if len(route) < 1:
            raise InvalidSolutionError("route must keep at least one node")
        if route.min() < 0 or route.max() >= self.n or len(np.unique(route)) != len(route):
            raise InvalidSolutionError("route holds invalid or repeated nodes")

    def evaluate(self, route: np.ndarray) -> np.ndarray:
        self.validate(route)
        route = np.asarray(route)
        cost = self.costs.cycle_cost(route)
        prof = self.profits[route]
        return np.concatenate([-cost, [math.fsum(col) for col in prof.T]])

    def random_solution(self, rng: np.random.Generator) -> np.ndarray:
        return rng.permutation(self.n)[: max(1, self.n // 2)]

    # -- neighborhood ---------------------------------------------------

    def move_groups(self, route: np.ndarray) -> list[MoveSet]:
        """Candidate-restricted moves split by kind (two-edge, delete, insert, exchange)."""
        route = np.asarray(route)
        m = len(route)
        inside = np.zeros(self.n, dtype=bool)
        inside[route] = True
        outside = np.flatnonzero(~inside)

        two_edge = two_edge_moves(route, self.cand)
        delete = MoveSet.of(DELETE, np.arange(m)) if m >= 2 else MoveSet.empty()
        if len(outside):
            near = self.cand[np.ix_(outside, route)]
            allowed = near | np.roll(near, 1, axis=1)
            allowed[~allowed.any(axis=1)] = True
            u, pos = np.nonzero(allowed)
            insert = MoveSet.of(INSERT, outside[u], pos)
            pos, u = np.divmod(np.arange(m * len(outside)), len(outside))
            exchange = MoveSet.of(EXCHANGE, pos, outside[u])
        else:
            insert = exchange = MoveSet.empty()
        return [two_edge, delete, insert, exchange]

    def neighborhood(self, route: np.ndarray) -> MoveSet:
        return MoveSet.concat(self.move_groups(route))

    def sample_moves(self, route: np.ndarray, rng: np.random.Generator, count: int) -> MoveSet:
        return sample_from(self.move_groups(route), rng, count)

    def deltas(self, route: np.ndarray, moves: MoveSet) -> np.ndarray:
        route = np.asarray(route)
        m = len(route)
        out = np.zeros((len(moves), self.d))
        d1 = self.d1
        kind = moves.kind

        sel = np.flatnonzero(kind == TWO_EDGE)
        if len(sel):
            out[sel, :d1] = -two_edge_cost_delta(self.costs, route, moves.a[sel], moves.b[sel]).T

        sel = np.flatnonzero(kind == DELETE)
        if len(sel):
            pos = moves.a[sel]
            prev, v, nxt = route[pos - 1], route[pos], route[(pos + 1) % m]
            c = self.costs.cost(prev, nxt) - self.costs.cost(prev, v) - self.costs.cost(v, nxt)
            out[sel, :d1] = -c.T
            out[sel, d1:] = -self.profits[v]

        sel = np.flatnonzero(kind == INSERT)
        if len(sel):
            u, pos = moves.a[sel], moves.b[sel]
            prev, nxt = route[pos - 1], route[pos % m]
            c = self.costs.cost(prev, u) + self.costs.cost(u, nxt) - self.costs.cost(prev, nxt)
            out[sel, :d1] = -c.T
            out[sel, d1:] = self.profits[u]

        sel = np.flatnonzero(kind == EXCHANGE)
        if len(sel):
            pos, u = moves.a[sel], moves.b[sel]
            prev, v, nxt = route[pos - 1], route[pos], route[(pos + 1) % m]
            if m > 1:
                c = (self.costs.cost(prev, u) + self.costs.cost(u, nxt)
                     - self.costs.cost(prev, v) - self.costs.cost(v, nxt))
                out[sel, :d1] = -c.T
            out[sel, d1:] = self.profits[u] - self.profits[v]
        return out

    def apply(self, route: np.ndarray, move: Move) -> np.ndarray:
        route = np.asarray(route)
        m = len(route)
        if isinstance(move, TwoEdgeExchange):
            return apply_two_edge(route, move.i, move.j)
        if isinstance(move, NodeDelete):
            if m < 2 or not 0 <= move.position < m:
                raise InvalidMoveError(f"cannot delete position {move.position} from a route of {m}")
            return np.delete(route, move.position)
        if isinstance(move, NodeInsert):
            if not 0 <= move.position < m or not 0 <= move.node < self.n or move.node in route:
                raise InvalidMoveError(f"invalid insertion {move!r}")
            return np.insert(route, move.position, move.node)
        if isinstance(move, NodeExchange):
            if not 0 <= move.position < m or not 0 <= move.node < self.n or move.node in route:
                raise InvalidMoveError(f"invalid exchange {move!r}")
            new = route.copy()
            new[move.position] = move.node
            return new
        raise InvalidMoveError(f"not a move: {move!r}")

    def apply_move_delta(self, route: np.ndarray, move: Move) -> tuple[np.ndarray, np.ndarray]:
        new = self.apply(route, move)
        return new, self.deltas(route, MoveSet.from_moves([move]))[0]

    def to_raw(self, y: np.ndarray) -> np.ndarray:
        y = np.array(y, dtype=float)
        y[..., : self.d1] *= -1
        return y

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MTSPWPInstance)
            and self.k == other.k
            and np.array_equal(self.coords, other.coords)
            and np.array_equal(self.profits, other.profits)
        )

    def __repr__(self) -> str:
        return f"MTSPWPInstance(n={self.n}, d1={self.d1}, d2={self.d2}, k={self.k})"


def generate_mtspwp(n: int, d1: int, d2: int, seed: int, candidates: int = DEFAULT_CANDIDATES, cache: bool | None = None) -> MTSPWPInstance:
    """Random MTSPWP: cost planes as for MTSP, profits uniform in [0, 2000]."""
    if n < 5 or d1 < 1 or d2 < 1:
        raise ValueError("need n >= 5, d1 >= 1 and d2 >= 1")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, COORD_RANGE, size=(d1, n, 2))
    profits = rng.uniform(0.0, PROFIT_RANGE, size=(n, d2))
    return MTSPWPInstance(coords, profits, candidates, cache, name=f"mtspwp-n{n}-d{d1}+{d2}-s{seed}")
