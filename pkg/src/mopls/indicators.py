"""Quality indicators for Pareto archives (canonical maximization orientation)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import moocore
import numpy as np

from mopls.domain import REFERENCE_MARGIN, safe_ranges
from mopls.search import WeightedSum, steepest_local_search

EXACT_MAX_D = 6
EXACT_MAX_POINTS = 10_000
LATTICE_GRANULARITY = {2: 299, 3: 23, 4: 12, 5: 8, 6: 6, 7: 5, 8: 4}


class ReferencePointError(ValueError):
    pass


@dataclass(frozen=True)
class HypervolumeConfig:
    """``mode`` is ``"exact"`` (own dimension sweep), ``"engine"`` (moocore) or ``"monte-carlo"``."""

    reference: np.ndarray
    mode: str = "exact"
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "engine", "monte-carlo"):
            raise ValueError(f"unknown hypervolume mode {self.mode!r}")
        if self.samples < 1:
            raise ValueError("samples must be positive")


def _check_points(points, reference) -> tuple[np.ndarray, np.ndarray]:
    P = np.asarray(points, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if P.size == 0:
        return P.reshape(0, len(ref)), ref
    P = np.atleast_2d(P)
    if P.shape[1] != len(ref):
        raise ValueError("points and reference differ in dimension")
    if not (P >= ref).all():
        raise ReferencePointError("every point must weakly dominate the reference point")
    return P, ref


def clip_to_reference(points, reference) -> np.ndarray:
    """Keep only points strictly better than ``reference`` in every objective."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        return P.reshape(0, len(reference))
    return P[(P > np.asarray(reference)).all(axis=1)]


def _sweep(P: np.ndarray, ref: np.ndarray) -> float:
    n, d = P.shape
    if n == 0:
        return 0.0
    if d == 1:
        return float(P[:, 0].max() - ref[0])
    if d == 2:
        order = np.argsort(-P[:, 0], kind="stable")
        x = P[order, 0]
        best = np.maximum.accumulate(P[order, 1])
        nxt = np.append(x[1:], ref[0])
        return float(np.sum((x - nxt) * (best - ref[1])))
    order = np.argsort(-P[:, -1], kind="stable")
    P = P[order]
    z = np.append(P[:, -1], ref[-1])
    front = np.empty((0, d - 1))
    vol = 0.0
    for i in range(n):
        p = P[i, :-1]
        if not (front >= p).all(axis=1).any():
            front = np.vstack([front[~(front <= p).all(axis=1)], p])
        h = z[i] - z[i + 1]
        if h > 0:
            vol += h * _sweep(front, ref[:-1])
    return vol


def hypervolume_exact(points, reference) -> float:
    """Lebesgue measure of the region dominated by ``points`` and bounded by ``reference``.

    Recursive sweep over the last objective; meant for fronts of modest size.
    """
    P, ref = _check_points(points, reference)
    if P.shape[1] > EXACT_MAX_D or len(P) > EXACT_MAX_POINTS:
        raise ValueError(f"exact mode supports d <= {EXACT_MAX_D} and at most {EXACT_MAX_POINTS} points")
    return _sweep(np.unique(P, axis=0), ref)


def hypervolume_engine(points, reference) -> float:
    P, ref = _check_points(points, reference)
    if len(P) == 0:
        return 0.0
    return float(moocore.hypervolume(P, ref=ref, maximise=True))


def hypervolume_monte_carlo(points, reference, samples: int, rng: np.random.Generator, batch: int = 100_000) -> tuple[float, float]:
    """Unbiased estimate and its standard error from uniform samples in the bounding box."""
    P, ref = _check_points(points, reference)
    if len(P) == 0:
        return 0.0, 0.0
    top = P.max(axis=0)
    box = float(np.prod(top - ref))
    hits = 0
    left = samples
    while left:
        k = min(batch, left)
        S = rng.uniform(ref, top, size=(k, len(ref)))
        covered = np.zeros(k, dtype=bool)
        for p in P:
            covered |= (S <= p).all(axis=1)
        hits += int(covered.sum())
        left -= k
    frac = hits / samples
    return box * frac, box * math.sqrt(frac * (1 - frac) / samples)


def hypervolume(points, cfg: HypervolumeConfig) -> float:
    if cfg.mode == "exact":
        return hypervolume_exact(points, cfg.reference)
    if cfg.mode == "engine":
        return hypervolume_engine(points, cfg.reference)
    return hypervolume_monte_carlo(points, cfg.reference, cfg.samples, np.random.default_rng(cfg.seed))[0]


# -- R indicator -----------------------------------------------------------


def weight_lattice(d: int, k: int) -> np.ndarray:
    """All weight vectors with components in multiples of ``1/k`` summing to one."""
    if k < 1 or d < 1:
        raise ValueError("need d >= 1 and k >= 1")
    rows = []
    for bars in combinations(range(k + d - 1), d - 1):
        edges = (-1,) + bars + (k + d - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(d)])
    return np.array(rows, dtype=float) / k


def default_granularity(d: int) -> int:
    return LATTICE_GRANULARITY.get(d, 4)


@dataclass(frozen=True)
class RIndicatorConfig:
    reference: np.ndarray
    ranges: np.ndarray
    granularity: int | None = None

    def __post_init__(self):
        if self.granularity is not None and self.granularity < 1:
            raise ValueError("granularity must be at least 1")

    def lattice(self) -> np.ndarray:
        d = len(self.reference)
        return weight_lattice(d, self.granularity or default_granularity(d))


def r_indicator(points, cfg: RIndicatorConfig, chunk: int = 4096) -> float:
    """Mean over lattice weights of the best range-normalized Chebycheff value; lower is better."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        raise ValueError("R indicator of an empty archive")
    W = cfg.lattice() / safe_ranges(np.asarray(cfg.ranges, dtype=float))
    gap = np.asarray(cfg.reference, dtype=float) - P
    best = np.full(len(W), np.inf)
    for s in range(0, len(P), chunk):
        g = gap[s : s + chunk]
        vals = (W[:, None, :] * g[None, :, :]).max(axis=2)
        np.minimum(best, vals.min(axis=1), out=best)
    return float(best.mean())


# -- reference points --------------------------------------------------------


@dataclass(frozen=True)
class ObjectiveBounds:
    """Approximate ideal and worst points from single-objective local optima."""

    ideal: np.ndarray
    worst: np.ndarray

    @property
    def ranges(self) -> np.ndarray:
        return safe_ranges(self.ideal - self.worst, self.ideal)

    def hypervolume_reference(self, scale: float = 1.5) -> np.ndarray:
        if scale <= 1:
            raise ValueError("scale must exceed 1")
        return self.worst - (scale - 1) * (self.ideal - self.worst)

    def r_reference(self) -> np.ndarray:
        return self.ideal + REFERENCE_MARGIN * self.ranges


def approximate_bounds(inst, rng: np.random.Generator) -> ObjectiveBounds:
    """Optimize each objective alone by steepest local search from a random start."""
    ys = []
    for k in range(inst.d):
        w = np.zeros(inst.d)
        w[k] = 1.0
        ys.append(steepest_local_search(inst, WeightedSum(w), inst.random_solution(rng)).objectives)
    Y = np.array(ys)
    return ObjectiveBounds(Y.max(axis=0), Y.min(axis=0))


def approximate_nadir_reference(inst, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Hypervolume reference: observed worst values pushed away from the ideal by ``scale - 1`` of the range."""
    return approximate_bounds(inst, rng).hypervolume_reference(scale)


def normalized_hypervolume_trace(times, values) -> list[tuple[float, float]]:
    """Divide a hypervolume series by its first (seeding) value."""
    values = [float(v) for v in values]
    if not values or values[0] <= 0:
        raise ValueError("first hypervolume of the trace must be positive")
    base = values[0]
    return [(float(t), v / base) for t, v in zip(times, values)]
