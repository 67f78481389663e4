"""Shared machinery for the Euclidean routing problems."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from mopls.problems.moves import TWO_EDGE, MoveSet

COORD_RANGE = 1000.0
DEFAULT_CANDIDATES = 8
MATRIX_CACHE_LIMIT = 512


class InvalidSolutionError(ValueError):
    pass


class InvalidMoveError(ValueError):
    pass


class NoMoveError(RuntimeError):
    """Raised when a solution has no applicable neighborhood move."""


def build_candidate_lists(coords: np.ndarray, k: int) -> np.ndarray:
    """Boolean candidate matrix from per-plane nearest neighbors.

    ``coords`` has shape ``(planes, n, 2)``.  Node ``v`` lists the ``k`` nearest
    nodes of every plane (ties broken by node index), and the relation is then
    closed under symmetry.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    planes, n, _ = coords.shape
    cand = np.zeros((n, n), dtype=bool)
    kk = min(k, n - 1)
    rows = np.arange(n)[:, None]
    for p in range(planes):
        dist = plane_distances(coords[p])
        dist[np.arange(n), np.arange(n)] = np.inf
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :kk]
        cand[rows, nearest] = True
    cand |= cand.T
    return cand


def plane_distances(xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


@lru_cache(maxsize=None)
def edge_pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``(i, j)`` of non-adjacent edges of an ``m``-cycle, ``i < j``."""
    if m < 4:
        z = np.empty(0, dtype=np.int64)
        return z, z
    i, j = np.triu_indices(m, k=2)
    keep = ~((i == 0) & (j == m - 1))
    return i[keep].astype(np.int64), j[keep].astype(np.int64)


class PlanarCosts:
    """Per-plane Euclidean edge costs, with optional cached distance matrices."""

    def __init__(self, coords: np.ndarray, cache: bool | None = None):
        self.coords = np.ascontiguousarray(coords, dtype=float)
        self.planes, self.n, _ = self.coords.shape
        if cache is None:
            cache = self.n <= MATRIX_CACHE_LIMIT
        self.cached = bool(cache)
        self._D = np.stack([plane_distances(c) for c in self.coords]) if self.cached else None

    def cost(self, a, b) -> np.ndarray:
        """Costs of edges ``(a[t], b[t])``; shape ``(planes, len(a))``."""
        if self._D is not None:
            return self._D[:, a, b]
        pa = self.coords[:, a, :]
        pb = self.coords[:, b, :]
        return np.hypot(pa[..., 0] - pb[..., 0], pa[..., 1] - pb[..., 1])

    def cycle_cost(self, order: np.ndarray) -> np.ndarray:
        """Exactly rounded closed-cycle cost per plane (rotation/reversal invariant)."""
        if len(order) < 2:
            return np.zeros(self.planes)
        nxt = np.empty_like(order)
        nxt[:-1] = order[1:]
        nxt[-1] = order[0]
        c = self.cost(order, nxt)
        return np.array([math.fsum(row) for row in c])

    def mean_edge(self) -> np.ndarray:
        n = self.n
        out = []
        for c in self.coords:
            dist = plane_distances(c)
            out.append(dist.sum() / (n * (n - 1)))
        return np.array(out)


def two_edge_moves(order: np.ndarray, cand: np.ndarray) -> MoveSet:
    """Candidate-restricted 2-edge exchanges on a cyclic order.

    A move is kept when at least one of its two new edges joins candidate
    neighbors.
    """
    m = len(order)
    i, j = edge_pairs(m)
    if not len(i):
        return MoveSet.empty()
    a, b = order[i], order[i + 1]
    c, e = order[j], order[(j + 1) % m]
    keep = cand[a, c] | cand[b, e]
    return MoveSet.of(TWO_EDGE, i[keep], j[keep])


def two_edge_cost_delta(costs: PlanarCosts, order: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Raw cost change per plane, shape ``(planes, len(i))``."""
    m = len(order)
    a, b = order[i], order[i + 1]
    c, e = order[j], order[(j + 1) % m]
    # paired so that an identity exchange (shared endpoint) cancels exactly
    return (costs.cost(a, c) - costs.cost(a, b)) + (costs.cost(b, e) - costs.cost(c, e))


def apply_two_edge(order: np.ndarray, i: int, j: int) -> np.ndarray:
    m = len(order)
    if not 0 <= i < j < m:
        raise InvalidMoveError(f"invalid two-edge exchange ({i}, {j}) for cycle of {m}")
    new = order.copy()
    new[i + 1 : j + 1] = order[i + 1 : j + 1][::-1]
    return new


def sample_from(groups: list[MoveSet], rng: np.random.Generator, count: int) -> MoveSet:
    """Draw ``count`` moves: kind uniform over non-empty groups, then payload uniform."""
    groups = [g for g in groups if len(g)]
    if not groups:
        raise NoMoveError("no applicable move")
    if len(groups) == 1:
        return groups[0].take(rng.integers(len(groups[0]), size=count))
    which = rng.integers(len(groups), size=count)
    sizes = np.array([len(g) for g in groups])
    within = np.floor(rng.random(count) * sizes[which]).astype(np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return MoveSet.concat(groups).take(offsets[which] + within)
