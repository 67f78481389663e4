"""Objective-space primitives.

All objective vectors are stored in maximization orientation; problems negate
minimized objectives before handing vectors to anything in this package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from operator import ge
from typing import Sequence

import numpy as np

MIN_OBJECTIVES = 2
MAX_OBJECTIVES = 8
REFERENCE_MARGIN = 0.1


class DimensionError(ValueError):
    """Two vectors (or a vector and an archive) disagree on objective count."""


class Relation(enum.Enum):
    DOMINATES = "dominates"
    DOMINATED_BY = "dominated_by"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def _check_dims(a: Sequence[float], b: Sequence[float]) -> None:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")


def weakly_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True if ``a`` is at least as good as ``b`` on every objective."""
    return all(map(ge, a, b))


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(map(ge, a, b)) and any(x > y for x, y in zip(a, b))


def compare(a: Sequence[float], b: Sequence[float]) -> Relation:
    """Pareto relation of ``a`` with respect to ``b`` (exact float comparisons)."""
    _check_dims(a, b)
    better = worse = False
    for x, y in zip(a, b):
        if x > y:
            better = True
        elif x < y:
            worse = True
        if better and worse:
            return Relation.INCOMPARABLE
    if better:
        return Relation.DOMINATES
    if worse:
        return Relation.DOMINATED_BY
    return Relation.EQUAL


@dataclass(frozen=True)
class ChebycheffFunction:
    """Weighted Chebycheff scalarizing function ``max_k w_k (ref_k - y_k)``.

    Lower values are better. ``weights`` are used as given, so range
    normalization has to happen before construction (see
    :func:`normalize_weights`).
    """

    weights: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        r = np.asarray(self.reference, dtype=float)
        _check_dims(w, r)
        if np.any(w < 0):
            raise ValueError("Chebycheff weights must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "reference", r)

    @property
    def d(self) -> int:
        return len(self.weights)

    def __call__(self, y: Sequence[float]) -> float:
        return chebycheff_value(self, y)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an ``(n, d)`` array of points."""
        return np.max(self.weights * (self.reference - points), axis=1)


def chebycheff_value(f: ChebycheffFunction, y: Sequence[float]) -> float:
    y = np.asarray(y, dtype=float)
    _check_dims(f.weights, y)
    return float(np.max(f.weights * (f.reference - y)))


def draw_weight_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample from the unit simplex in ``d`` dimensions.

    Normalized standard-exponential variates; exactly uniform on the simplex.
    """
    if d < MIN_OBJECTIVES:
        raise ValueError(f"need at least {MIN_OBJECTIVES} objectives, got {d}")
    e = rng.standard_exponential(d)
    return e / e.sum()


def safe_ranges(ranges: Sequence[float], values: Sequence[float] | None = None) -> np.ndarray:
    """Replace non-positive ranges by ``max(|value| * 1e-9, 1e-9)``.

    ``values`` are the per-objective magnitudes used for the substitute (for
    instance the archive maxima); when omitted only the absolute floor applies.
    """
    r = np.array(ranges, dtype=float)
    v = np.zeros_like(r) if values is None else np.abs(np.asarray(values, dtype=float))
    bad = ~(r > 0)
    r[bad] = np.maximum(v[bad] * 1e-9, 1e-9)
    return r


def normalize_weights(weights: Sequence[float], ranges: Sequence[float]) -> np.ndarray:
    """Divide each weight by the range of its objective (no re-normalization)."""
    w = np.asarray(weights, dtype=float)
    r = np.asarray(ranges, dtype=float)
    _check_dims(w, r)
    if np.any(~(r > 0)):
        raise ValueError("ranges must be strictly positive; apply safe_ranges first")
    return w / r


def reference_point_from_extremes(maxima: Sequence[float], ranges: Sequence[float]) -> np.ndarray:
    """Archive maxima pushed outwards by 10% of each objective's range."""
    m = np.asarray(maxima, dtype=float)
    r = np.asarray(ranges, dtype=float)
    _check_dims(m, r)
    if np.any(r < 0):
        raise ValueError("ranges must be non-negative")
    return m + REFERENCE_MARGIN * safe_ranges(r, m)
