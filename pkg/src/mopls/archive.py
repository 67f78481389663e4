"""Pareto archives: a brute-force list and the ND-Tree.

Both archives store distinct, mutually non-dominated objective vectors (in
maximization orientation) together with an opaque payload, and both answer
"which member minimizes this Chebycheff function" queries.  The list archive is
the reference implementation the ND-Tree is tested against.
"""

from __future__ import annotations

import math
from operator import ge
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from mopls.domain import ChebycheffFunction, DimensionError

DEFAULT_LEAF_CAPACITY = 20


class EmptyArchiveError(LookupError):
    pass


class Entry:
    """An archived solution: objective vector, payload and bookkeeping ids."""

    __slots__ = ("y", "payload", "serial", "slot")

    def __init__(self, y: tuple[float, ...], payload: Any, serial: int):
        self.y = y
        self.payload = payload
        self.serial = serial
        self.slot = -1

    def __repr__(self) -> str:
        return f"Entry(y={self.y}, serial={self.serial})"


def _as_point(y: Sequence[float], d: int) -> tuple[float, ...]:
    if len(y) != d:
        raise DimensionError(f"expected {d} objectives, got {len(y)}")
    p = tuple(float(v) for v in y)
    if not all(map(math.isfinite, p)):
        raise ValueError(f"objective vector must be finite: {p}")
    return p


class ParetoArchive:
    """Behaviour shared by both archive implementations."""

    backend = "abstract"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be positive")
        self.d = d
        self._serial = 0

    def _new_entry(self, y: tuple[float, ...], payload: Any) -> Entry:
        e = Entry(y, payload, self._serial)
        self._serial += 1
        return e

    def __len__(self) -> int:
        raise NotImplementedError

    def __bool__(self) -> bool:
        return len(self) > 0

    def objectives(self) -> np.ndarray:
        """``(n, d)`` array of stored vectors in insertion order."""
        entries = self.entries()
        if not entries:
            return np.empty((0, self.d))
        return np.array([e.y for e in entries], dtype=float)

    def point_set(self) -> set[tuple[float, ...]]:
        return {e.y for e in self.entries()}

    def extend(self, items: Iterable[tuple[Sequence[float], Any]]) -> int:
        return sum(self.update(y, p) for y, p in items)

    def dumps(self) -> str:
        return dumps_points(self.objectives())

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


class ListArchive(ParetoArchive):
    """Archive kept as a flat array; every update scans all members."""

    backend = "list"

    def __init__(self, d: int):
        super().__init__(d)
        self._Y = np.empty((16, d))
        self._E = np.empty(16, dtype=object)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def entries(self) -> list[Entry]:
        return list(self._E[: self._n])

    def objectives(self) -> np.ndarray:
        return self._Y[: self._n].copy()

    def update(self, y: Sequence[float], payload: Any = None) -> bool:
        y = _as_point(y, self.d)
        n = self._n
        if n:
            Y = self._Y[:n]
            yv = np.asarray(y)
            if (Y >= yv).all(axis=1).any():
                return False
            dominated = (Y <= yv).all(axis=1)
            if dominated.any():
                keep = ~dominated
                n = int(keep.sum())
                self._Y[:n] = Y[keep]
                self._E[:n] = self._E[: self._n][keep]
                self._E[n : self._n] = None
                self._n = n
        if n == len(self._E):
            self._Y = np.concatenate([self._Y, np.empty_like(self._Y)])
            self._E = np.concatenate([self._E, np.empty(len(self._E), dtype=object)])
        self._Y[n] = y
        self._E[n] = self._new_entry(y, payload)
        self._n = n + 1
        return True

    def minimize_chebycheff(self, f: ChebycheffFunction) -> tuple[Entry, float]:
        if not self._n:
            raise EmptyArchiveError("cannot query an empty archive")
        if f.d != self.d:
            raise DimensionError(f"function has {f.d} objectives, archive {self.d}")
        vals = f.values(self._Y[: self._n])
        i = int(np.argmin(vals))
        return self._E[i], float(vals[i])

    def random_entry(self, rng: np.random.Generator) -> Entry:
        if not self._n:
            raise EmptyArchiveError("cannot sample an empty archive")
        return self._E[int(rng.integers(self._n))]

    def extremes(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-objective (maxima, minima) over the archive."""
        if not self._n:
            raise EmptyArchiveError("empty archive has no extremes")
        Y = self._Y[: self._n]
        return Y.max(axis=0), Y.min(axis=0)


class _Node:
    __slots__ = ("ideal", "nadir", "children", "entries", "cache")

    def __init__(self, entries: list[Entry] | None = None):
        self.children: list[_Node] | None = None
        self.entries = entries
        self.cache: np.ndarray | None = None
        if entries:
            self.set_bounds_from_entries()

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def set_bounds_from_entries(self) -> None:
        pts = [e.y for e in self.entries]
        self.ideal = list(map(max, *pts)) if len(pts) > 1 else list(pts[0])
        self.nadir = list(map(min, *pts)) if len(pts) > 1 else list(pts[0])

    def set_bounds_from_children(self) -> None:
        ch = self.children
        if len(ch) == 1:
            self.ideal = list(ch[0].ideal)
            self.nadir = list(ch[0].nadir)
        else:
            self.ideal = list(map(max, *(c.ideal for c in ch)))
            self.nadir = list(map(min, *(c.nadir for c in ch)))

    def is_empty(self) -> bool:
        return not (self.entries if self.children is None else self.children)


_REJECT, _SKIP, _CHANGED, _REMOVE = range(4)


def _dominates(a, b) -> bool:
    return all(map(ge, a, b)) and a != b


class NDTreeArchive(ParetoArchive):
    """Pareto archive organized as an ND-Tree.

    Every node keeps an approximate ideal point (componentwise max over its
    subtree) and an approximate nadir point (componentwise min).  Bounds are
    kept tight: they expand on insertion and are recomputed from children
    after deletions, so the root bounds equal the exact archive extremes.

    Args:
        d: Number of objectives.
        leaf_capacity: Maximum entries in a leaf before it is split.
        max_children: Number of children created by a split (default ``d + 1``).
    """

    backend = "nd-tree"

    def __init__(self, d: int, leaf_capacity: int = DEFAULT_LEAF_CAPACITY, max_children: int | None = None):
        super().__init__(d)
        if leaf_capacity < 1:
            raise ValueError("leaf_capacity must be positive")
        self.leaf_capacity = leaf_capacity
        self.max_children = max_children if max_children is not None else d + 1
        if self.max_children < 2:
            raise ValueError("max_children must be at least 2")
        self.root: _Node | None = None
        self._pool: list[Entry] = []
        self.last_query_visits = 0

    def __len__(self) -> int:
        return len(self._pool)

    def entries(self) -> list[Entry]:
        return sorted(self._pool, key=lambda e: e.serial)

    # -- update ---------------------------------------------------------

    def update(self, y: Sequence[float], payload: Any = None) -> bool:
        y = _as_point(y, self.d)
        root = self.root
        if root is not None:
            status = self._visit(root, y)
            if status == _REJECT:
                return False
            if status == _REMOVE:
                self._forget_subtree(root)
                self.root = None
            elif status == _CHANGED:
                if root.is_empty():
                    self.root = None
                elif not root.is_leaf and len(root.children) == 1:
                    self.root = root.children[0]
        self._insert(self._new_entry(y, payload))
        return True

    def _visit(self, node: _Node, y: tuple[float, ...]) -> int:
        nadir = node.nadir
        if all(map(ge, nadir, y)):
            return _REJECT
        ideal = node.ideal
        y_covers_ideal = all(map(ge, y, ideal))
        if y_covers_ideal and list(y) != ideal:
            return _REMOVE
        if not (y_covers_ideal or all(map(ge, ideal, y)) or all(map(ge, y, nadir))):
            return _SKIP

        if node.children is None:
            arr = node.cache
            if arr is None:
                arr = node.cache = np.array([e.y for e in node.entries])
            yv = np.array(y)
            if (arr >= yv).all(axis=1).any():
                return _REJECT
            hit = (arr <= yv).all(axis=1)
            if not hit.any():
                return _SKIP
            removed = [e for e, h in zip(node.entries, hit.tolist()) if h]
            node.entries = [e for e, h in zip(node.entries, hit.tolist()) if not h]
            node.cache = None
            for e in removed:
                self._drop_from_pool(e)
            if node.entries:
                node.set_bounds_from_entries()
            return _CHANGED

        children = node.children
        changed = False
        i = 0
        while i < len(children):
            child = children[i]
            status = self._visit(child, y)
            if status == _REJECT:
                return _REJECT
            if status == _REMOVE:
                self._forget_subtree(child)
                del children[i]
                changed = True
                continue
            if status == _CHANGED:
                changed = True
                if child.is_empty():
                    del children[i]
                    continue
                if child.children is not None and len(child.children) == 1:
                    children[i] = child.children[0]
            i += 1
        if not changed:
            return _SKIP
        if children:
            node.set_bounds_from_children()
        return _CHANGED

    def _drop_from_pool(self, e: Entry) -> None:
        pool = self._pool
        last = pool.pop()
        if last is not e:
            pool[e.slot] = last
            last.slot = e.slot
        e.slot = -1

    def _forget_subtree(self, node: _Node) -> None:
        stack = [node]
        while stack:
            n = stack.pop()
            if n.children is None:
                for e in n.entries:
                    self._drop_from_pool(e)
            else:
                stack.extend(n.children)

    def _insert(self, e: Entry) -> None:
        e.slot = len(self._pool)
        self._pool.append(e)
        y = e.y
        node = self.root
        if node is None:
            self.root = _Node([e])
            return
        while True:
            node.ideal = list(map(max, node.ideal, y))
            node.nadir = list(map(min, node.nadir, y))
            if node.children is None:
                node.entries.append(e)
                node.cache = None
                if len(node.entries) > self.leaf_capacity:
                    self._split(node)
                return
            node = _closest_child(node.children, y)

    def _split(self, node: _Node) -> None:
        entries = node.entries
        pts = np.array([e.y for e in entries])
        dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        k = min(self.max_children, len(entries))
        seeds = [int(np.argmax(dist.sum(axis=1)))]
        free = np.ones(len(entries), dtype=bool)
        free[seeds[0]] = False
        while len(seeds) < k:
            score = np.where(free, dist[:, seeds].mean(axis=1), -np.inf)
            s = int(np.argmax(score))
            seeds.append(s)
            free[s] = False
        children = [_Node([entries[s]]) for s in seeds]
        for i in np.flatnonzero(free):
            e = entries[i]
            child = _closest_child(children, e.y)
            child.entries.append(e)
            child.ideal = list(map(max, child.ideal, e.y))
            child.nadir = list(map(min, child.nadir, e.y))
        node.entries = None
        node.cache = None
        node.children = children

    # -- queries --------------------------------------------------------

    def minimize_chebycheff(self, f: ChebycheffFunction) -> tuple[Entry, float]:
        """Member minimizing ``f``, pruning subtrees by their ideal points."""
        if self.root is None:
            raise EmptyArchiveError("cannot query an empty archive")
        if f.d != self.d:
            raise DimensionError(f"function has {f.d} objectives, archive {self.d}")
        w = f.weights
        ref = f.reference
        wl = w.tolist()
        rl = ref.tolist()

        def bound(point):
            return max([a * (b - c) for a, b, c in zip(wl, rl, point)])

        best_val = math.inf
        best: Entry | None = None
        visits = 0

        def visit(node: _Node) -> None:
            nonlocal best_val, best, visits
            visits += 1
            if node.children is None:
                arr = node.cache
                if arr is None:
                    arr = node.cache = np.array([e.y for e in node.entries])
                vals = np.max(w * (ref - arr), axis=1)
                i = int(np.argmin(vals))
                if vals[i] < best_val:
                    best_val = float(vals[i])
                    best = node.entries[i]
                return
            scores = [bound(c.ideal) for c in node.children]
            first = scores.index(min(scores))
            if scores[first] < best_val:
                visit(node.children[first])
                for j, child in enumerate(node.children):
                    if j != first and scores[j] < best_val:
                        visit(child)

        visit(self.root)
        self.last_query_visits = visits
        return best, best_val

    def random_entry(self, rng: np.random.Generator) -> Entry:
        if not self._pool:
            raise EmptyArchiveError("cannot sample an empty archive")
        return self._pool[int(rng.integers(len(self._pool)))]

    def extremes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.root is None:
            raise EmptyArchiveError("empty archive has no extremes")
        return np.array(self.root.ideal), np.array(self.root.nadir)

    # -- diagnostics ----------------------------------------------------

    def depth(self) -> int:
        def walk(n: _Node) -> int:
            return 1 if n.children is None else 1 + max(walk(c) for c in n.children)

        return 0 if self.root is None else walk(self.root)

    def node_count(self) -> int:
        count = 0
        stack = [self.root] if self.root is not None else []
        while stack:
            n = stack.pop()
            count += 1
            if n.children is not None:
                stack.extend(n.children)
        return count

    def check_invariants(self) -> None:
        """Walk the tree and assert the structural properties; raises AssertionError."""
        if self.root is None:
            assert not self._pool, "empty tree but non-empty pool"
            return
        seen: set[int] = set()

        def walk(n: _Node) -> list[Entry]:
            if n.children is None:
                assert n.entries, "empty leaf"
                assert len(n.entries) <= self.leaf_capacity, "overfull leaf"
                sub = list(n.entries)
            else:
                assert len(n.children) >= 2, "internal node with fewer than two children"
                sub = []
                for c in n.children:
                    assert all(map(ge, n.ideal, c.ideal)), "child ideal exceeds parent ideal"
                    assert all(map(ge, c.nadir, n.nadir)), "parent nadir exceeds child nadir"
                    sub.extend(walk(c))
            for e in sub:
                assert all(map(ge, n.ideal, e.y)), "entry outside ideal bound"
                assert all(map(ge, e.y, n.nadir)), "entry outside nadir bound"
            return sub

        everything = walk(self.root)
        for e in everything:
            assert id(e) not in seen, "entry stored twice"
            seen.add(id(e))
        assert len(everything) == len(self._pool), "pool size differs from tree content"
        for i, e in enumerate(self._pool):
            assert e.slot == i, "pool slot out of sync"
        pts = [e.y for e in everything]
        assert len(set(pts)) == len(pts), "duplicate objective vectors"


def _closest_child(children: list[_Node], y: tuple[float, ...]) -> _Node:
    best = None
    best_d = math.inf
    for c in children:
        dist = 0.0
        for a, lo, hi in zip(y, c.nadir, c.ideal):
            t = a - 0.5 * (lo + hi)
            dist += t * t
        if dist < best_d:
            best_d = dist
            best = c
    return best


def make_archive(backend: str, d: int, **kwargs) -> ParetoArchive:
    if backend == "list":
        return ListArchive(d)
    if backend in ("nd-tree", "ndtree", "tree"):
        return NDTreeArchive(d, **kwargs)
    raise ValueError(f"unknown archive backend {backend!r}")


def query_cost_probe(archive: NDTreeArchive, f: ChebycheffFunction) -> int:
    """Number of tree nodes entered while minimizing ``f``."""
    archive.minimize_chebycheff(f)
    return archive.last_query_visits


def dumps_points(points: np.ndarray) -> str:
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    lines = [f"# d={d} n={n}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in points)
    return "\n".join(lines) + "\n"


def load_points(path: str | Path) -> np.ndarray:
    """Read an archive dump (``# d=<d> n=<count>`` header, one vector per line)."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path}: missing archive dump header")
    fields = dict(tok.split("=") for tok in text[0].lstrip("#").split())
    d, n = int(fields["d"]), int(fields["n"])
    rows = [list(map(float, line.split())) for line in text[1:] if line.strip()]
    if len(rows) != n or any(len(r) != d for r in rows):
        raise ValueError(f"{path}: header says d={d} n={n}, body disagrees")
    return np.array(rows, dtype=float).reshape(n, d)
